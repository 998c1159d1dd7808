#pragma once

#include "dynimg/coefficients.hpp"
#include "dynimg/errors.hpp"
#include "dynimg/imageio.hpp"
#include "dynimg/metrics.hpp"
#include "dynimg/pooling.hpp"
#include "dynimg/rank_solver.hpp"
#include "dynimg/rankpool_layer.hpp"
#include "dynimg/rng.hpp"
#include "dynimg/segmentation.hpp"
#include "dynimg/tensor.hpp"
