#pragma once

#include "kinid/errors.hpp"
#include "kinid/se3.hpp"
#include "kinid/chain_sim.hpp"
#include "kinid/feasibility.hpp"
#include "kinid/identify.hpp"
#include "kinid/montecarlo.hpp"
#include "kinid/io.hpp"
