#pragma once

#include "bfdecide/bayes_factor.hpp"
#include "bfdecide/compute.hpp"
#include "bfdecide/decision.hpp"
#include "bfdecide/densities.hpp"
#include "bfdecide/errors.hpp"
#include "bfdecide/hypotheses.hpp"
#include "bfdecide/inference.hpp"
#include "bfdecide/interval.hpp"
#include "bfdecide/json_io.hpp"
#include "bfdecide/models.hpp"
#include "bfdecide/plotdata.hpp"
#include "bfdecide/priors.hpp"
#include "bfdecide/quadrature.hpp"
#include "bfdecide/service.hpp"
#include "bfdecide/store.hpp"
#include "bfdecide/workflow.hpp"
