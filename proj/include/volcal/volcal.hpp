#pragma once

#include "volcal/black_scholes.hpp"
#include "volcal/calibration.hpp"
#include "volcal/charts.hpp"
#include "volcal/errors.hpp"
#include "volcal/evaluation.hpp"
#include "volcal/heston.hpp"
#include "volcal/json_io.hpp"
#include "volcal/market_data.hpp"
#include "volcal/model.hpp"
#include "volcal/monte_carlo.hpp"
#include "volcal/msv.hpp"
#include "volcal/price_result.hpp"
#include "volcal/quadrature.hpp"
#include "volcal/rng.hpp"
