#pragma once

#include "pml3er/common.hpp"
#include "pml3er/dataset.hpp"
#include "pml3er/dataset_io.hpp"
#include "pml3er/enrichment.hpp"
#include "pml3er/experiment.hpp"
#include "pml3er/knn.hpp"
#include "pml3er/metrics.hpp"
#include "pml3er/nnls.hpp"
#include "pml3er/random.hpp"
#include "pml3er/trainer.hpp"
