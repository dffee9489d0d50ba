#pragma once

#include "nucs/baselines.hpp"
#include "nucs/budget.hpp"
#include "nucs/class_difficulty.hpp"
#include "nucs/dataset.hpp"
#include "nucs/errors.hpp"
#include "nucs/gaussian.hpp"
#include "nucs/io.hpp"
#include "nucs/parallel.hpp"
#include "nucs/pipeline.hpp"
#include "nucs/ridge.hpp"
#include "nucs/window.hpp"
