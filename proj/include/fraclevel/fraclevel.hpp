#ifndef FRACLEVEL_FRACLEVEL_HPP
#define FRACLEVEL_FRACLEVEL_HPP

#include "fraclevel/errors.hpp"
#include "fraclevel/special_functions.hpp"
#include "fraclevel/power_calculus.hpp"
#include "fraclevel/grid_calculus.hpp"
#include "fraclevel/quadrature.hpp"
#include "fraclevel/mittag_leffler.hpp"
#include "fraclevel/level_derivative.hpp"
#include "fraclevel/spectral.hpp"
#include "fraclevel/parallel.hpp"
#include "fraclevel/inverse_solver.hpp"
#include "fraclevel/random_cases.hpp"
#include "fraclevel/io.hpp"
#include "fraclevel/verification.hpp"

#endif
