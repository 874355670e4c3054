#pragma once

// Umbrella header.

#include "vnq/operators.hpp"
#include "vnq/dynamics.hpp"
#include "vnq/hardy.hpp"
#include "vnq/locality.hpp"
#include "vnq/report.hpp"
