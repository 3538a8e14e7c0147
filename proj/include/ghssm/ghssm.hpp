#pragma once

#include "ghssm/numerics/special_functions.hpp"
#include "ghssm/numerics/densities.hpp"
#include "ghssm/random.hpp"
#include "ghssm/jumps/params.hpp"
#include "ghssm/jumps/dominating.hpp"
#include "ghssm/jumps/truncated_gamma.hpp"
#include "ghssm/jumps/gig.hpp"
#include "ghssm/ssm/linear_ssm.hpp"
#include "ghssm/filter/kalman.hpp"
#include "ghssm/filter/smcmc.hpp"
#include "ghssm/io/csv.hpp"
#include "ghssm/io/config.hpp"
#include "ghssm/io/svg.hpp"
#include "ghssm/validation/quadrature.hpp"
#include "ghssm/validation/ks.hpp"
#include "ghssm/validation/suites.hpp"
#include "ghssm/cli/commands.hpp"
