#pragma once

// Umbrella header: large-deviation tail approximations for sums of i.i.d.
// zero-mean variables and homogeneous processes, with exact and Monte Carlo
// oracles.

#include "ldtail/accumulate.hpp"
#include "ldtail/asymptotics.hpp"
#include "ldtail/cgf.hpp"
#include "ldtail/commands.hpp"
#include "ldtail/convolution.hpp"
#include "ldtail/distribution.hpp"
#include "ldtail/errors.hpp"
#include "ldtail/exact_tail.hpp"
#include "ldtail/process.hpp"
#include "ldtail/report.hpp"
#include "ldtail/rng.hpp"
#include "ldtail/saddlepoint.hpp"
#include "ldtail/simulate.hpp"
#include "ldtail/special.hpp"
#include "ldtail/version.hpp"
