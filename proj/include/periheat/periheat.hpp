#pragma once

#include "periheat/cell.hpp"
#include "periheat/expint.hpp"
#include "periheat/geometry.hpp"
#include "periheat/grids.hpp"
#include "periheat/io.hpp"
#include "periheat/kernel.hpp"
#include "periheat/neumann.hpp"
#include "periheat/potentials.hpp"
#include "periheat/sensitivity.hpp"
#include "periheat/transmission.hpp"
