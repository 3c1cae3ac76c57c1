#ifndef EMBROBUST_EMBROBUST_HPP
#define EMBROBUST_EMBROBUST_HPP

/**
 * @file embrobust.hpp
 *
 * @brief Umbrella header for the embedding robustness toolkit.
 */

#include "confounders.hpp"
#include "dataset.hpp"
#include "folds.hpp"
#include "io.hpp"
#include "knn.hpp"
#include "logreg.hpp"
#include "neighbors.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "robustness.hpp"
#include "svg.hpp"
#include "synth.hpp"
#include "tsne.hpp"

#endif
