#pragma once

#include "holocycles/error.hpp"
#include "holocycles/polynomial.hpp"
#include "holocycles/core.hpp"
#include "holocycles/base_path.hpp"
#include "holocycles/transport.hpp"
#include "holocycles/linear_chart.hpp"
#include "holocycles/cycle_forge.hpp"
#include "holocycles/certify.hpp"
#include "holocycles/projective.hpp"
