#pragma once

#include "slqg/experiment.hpp"
#include "slqg/guarantees.hpp"
#include "slqg/io.hpp"
#include "slqg/kalman.hpp"
#include "slqg/linalg.hpp"
#include "slqg/model.hpp"
#include "slqg/riccati.hpp"
#include "slqg/scenarios.hpp"
#include "slqg/selection.hpp"
#include "slqg/sim.hpp"
