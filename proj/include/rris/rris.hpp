#pragma once

#include "rris/autodiff.hpp"
#include "rris/dataset.hpp"
#include "rris/error.hpp"
#include "rris/evaluation.hpp"
#include "rris/expression.hpp"
#include "rris/gradcheck.hpp"
#include "rris/lexicon.hpp"
#include "rris/mask.hpp"
#include "rris/metrics.hpp"
#include "rris/random.hpp"
#include "rris/refseg.hpp"
#include "rris/tensor.hpp"
#include "rris/text.hpp"
