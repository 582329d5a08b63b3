// Small tour: trace an expression, tokenize the trace, score two predictions.
#include <iostream>

#include "stepwise/stepwise.hpp"

int main(int argc, char** argv) {
  namespace sw = stepwise;
  const std::string src = argc > 1 ? argv[1] : "3468*4046/7424";

  const std::string line = sw::trace_text(src);
  std::cout << "trace:   " << line << "\n";

  std::cout << "tokens: ";
  for (sw::TokenId id : sw::encode(line)) std::cout << ' ' << id;
  std::cout << "\n";

  const std::string truth = line.substr(line.rfind('=') + 1);
  std::vector<sw::PredictionRecord> preds = {
      {"good", src, truth, line, {}, {}, {}},
      {"off", src, truth, src + "=1889.901400862069", {}, {}, {}},
  };
  const sw::EvalReport report = sw::evaluate(preds, 0.01);
  std::cout << report.summary_json().dump(2) << "\n";
  return 0;
}
