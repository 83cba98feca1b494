#pragma once

#include "mcde/bvn.hpp"
#include "mcde/copula.hpp"
#include "mcde/dependence.hpp"
#include "mcde/diagnostics.hpp"
#include "mcde/divergence.hpp"
#include "mcde/empirical.hpp"
#include "mcde/error.hpp"
#include "mcde/estimation.hpp"
#include "mcde/experiments.hpp"
#include "mcde/io.hpp"
#include "mcde/matrix.hpp"
#include "mcde/model_selection.hpp"
#include "mcde/normal.hpp"
#include "mcde/optimize.hpp"
#include "mcde/parallel.hpp"
#include "mcde/sampling.hpp"
