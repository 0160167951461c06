#pragma once

#include "geoquant/asymptotics.hpp"
#include "geoquant/bounds.hpp"
#include "geoquant/contour.hpp"
#include "geoquant/core.hpp"
#include "geoquant/depth.hpp"
#include "geoquant/directional.hpp"
#include "geoquant/error.hpp"
#include "geoquant/io.hpp"
#include "geoquant/rng.hpp"
#include "geoquant/samplers.hpp"
#include "geoquant/solver.hpp"
#include "geoquant/special.hpp"
