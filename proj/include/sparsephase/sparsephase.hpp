#pragma once

#include "sparsephase/config.hpp"
#include "sparsephase/experiment.hpp"
#include "sparsephase/fourier.hpp"
#include "sparsephase/grid.hpp"
#include "sparsephase/prf_io.hpp"
#include "sparsephase/retrieval.hpp"
#include "sparsephase/sparsity.hpp"
#include "sparsephase/sweep.hpp"
