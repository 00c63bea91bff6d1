#pragma once

#include "qapprox/linalg.hpp"
#include "qapprox/gateset.hpp"
#include "qapprox/expansion.hpp"
#include "qapprox/encodings.hpp"
#include "qapprox/targets.hpp"
#include "qapprox/objective.hpp"
#include "qapprox/lbfgs.hpp"
#include "qapprox/cmaes.hpp"
#include "qapprox/multistart.hpp"
#include "qapprox/circuit_loss.hpp"
#include "qapprox/fit.hpp"
#include "qapprox/baselines.hpp"
#include "qapprox/sampler.hpp"
#include "qapprox/bench.hpp"
