#pragma once

#include "pseudobo/acquisition.hpp"
#include "pseudobo/benchmarks.hpp"
#include "pseudobo/calibration.hpp"
#include "pseudobo/candidates.hpp"
#include "pseudobo/core.hpp"
#include "pseudobo/errors.hpp"
#include "pseudobo/experiment.hpp"
#include "pseudobo/external_objective.hpp"
#include "pseudobo/model.hpp"
#include "pseudobo/optimizer.hpp"
#include "pseudobo/random.hpp"
#include "pseudobo/randomized_prior.hpp"
#include "pseudobo/surrogates.hpp"
#include "pseudobo/uncertainty.hpp"
