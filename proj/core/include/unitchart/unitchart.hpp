#pragma once

// Convenience header pulling in the full public API.

#include "unitchart/charts.hpp"
#include "unitchart/errors.hpp"
#include "unitchart/inference.hpp"
#include "unitchart/models.hpp"
#include "unitchart/numerics.hpp"
#include "unitchart/rng.hpp"
#include "unitchart/simulation.hpp"
#include "unitchart/version.hpp"
