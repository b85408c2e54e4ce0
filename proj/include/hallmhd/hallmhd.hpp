#pragma once

#include "hallmhd/core.hpp"
#include "hallmhd/grid.hpp"
#include "hallmhd/field.hpp"
#include "hallmhd/spectral.hpp"
#include "hallmhd/dynamics.hpp"
#include "hallmhd/integrator.hpp"
#include "hallmhd/initial_data.hpp"
#include "hallmhd/diagnostics.hpp"
#include "hallmhd/decay.hpp"
#include "hallmhd/config.hpp"
#include "hallmhd/checkpoint.hpp"
#include "hallmhd/series.hpp"
#include "hallmhd/runner.hpp"
#include "hallmhd/verify.hpp"
