#pragma once

#include "innerdyn/boundary_measure.hpp"
#include "innerdyn/distortion.hpp"
#include "innerdyn/error.hpp"
#include "innerdyn/hyperbolic.hpp"
#include "innerdyn/inner_dynamics.hpp"
#include "innerdyn/inverse_branches.hpp"
#include "innerdyn/maps.hpp"
#include "innerdyn/moebius.hpp"
#include "innerdyn/periodic_finder.hpp"
#include "innerdyn/poly.hpp"
#include "innerdyn/report_io.hpp"
#include "innerdyn/rng.hpp"
#include "innerdyn/sphere.hpp"
#include "innerdyn/stolz.hpp"
