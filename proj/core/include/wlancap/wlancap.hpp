#pragma once

#include "wlancap/analytic.hpp"
#include "wlancap/binomial.hpp"
#include "wlancap/capacity.hpp"
#include "wlancap/csv.hpp"
#include "wlancap/delay.hpp"
#include "wlancap/error.hpp"
#include "wlancap/experiments.hpp"
#include "wlancap/model.hpp"
#include "wlancap/moment.hpp"
#include "wlancap/parallel.hpp"
#include "wlancap/rng.hpp"
#include "wlancap/scenario_io.hpp"
#include "wlancap/simulator.hpp"
