#pragma once

#include "stepwise/error.hpp"
#include "stepwise/numeric.hpp"
#include "stepwise/expr.hpp"
#include "stepwise/steps.hpp"
#include "stepwise/tokenizer.hpp"
#include "stepwise/datagen.hpp"
#include "stepwise/eval.hpp"
#include "stepwise/mwp.hpp"
