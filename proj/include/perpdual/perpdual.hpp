#pragma once

#include "perpdual/boundary.hpp"
#include "perpdual/calibration.hpp"
#include "perpdual/duality.hpp"
#include "perpdual/fd.hpp"
#include "perpdual/fundamental.hpp"
#include "perpdual/params.hpp"
#include "perpdual/pricing.hpp"
#include "perpdual/rational.hpp"
#include "perpdual/volatility.hpp"
