#pragma once

#include "swcorr/correlator.hpp"
#include "swcorr/cost_model.hpp"
#include "swcorr/errors.hpp"
#include "swcorr/grid.hpp"
#include "swcorr/grid_io.hpp"
#include "swcorr/moving_sum.hpp"
#include "swcorr/naive.hpp"
#include "swcorr/parallel.hpp"
#include "swcorr/window.hpp"
#include "swcorr/constant_window.hpp"
#include "swcorr/synthetic.hpp"
