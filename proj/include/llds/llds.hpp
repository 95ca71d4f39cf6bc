#pragma once

// Umbrella header for the llds library (everything except the CLI, which
// pulls in the vendored argument parser).

#include "llds/control.hpp"
#include "llds/errors.hpp"
#include "llds/io.hpp"
#include "llds/matrix.hpp"
#include "llds/model.hpp"
#include "llds/numerics.hpp"
#include "llds/plot.hpp"
#include "llds/problem_io.hpp"
#include "llds/simulate.hpp"
#include "llds/sysid.hpp"
