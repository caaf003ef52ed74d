#pragma once

#include "osem/graph.hpp"

namespace osem {

struct Confusion {
  double tp = 0.0;
  double fp = 0.0;
  int positives = 0;  // P: edges in the true skeleton
};

/// Edge-level agreement of two graphs after reducing both to patterns. A shared adjacency earns 1 when its
/// orientation status and direction agree, 0.5 when exactly one side is
/// undirected and 0 when both are directed opposite ways. With
/// `skeleton_only` every shared adjacency earns 1.
Confusion pattern_confusion(const Pdag& estimated, const Pdag& truth, bool skeleton_only = false);

struct Rates {
  double tpr = 0.0;
  double fprp = 0.0;
};

/// TPR = TP / P and FPRp = FP / P. Throws InputError when P = 0.
Rates tpr_fprp(double tp, double fp, int positives);
Rates tpr_fprp(const Confusion& c);

/// Skeleton symmetric difference plus v-structure symmetric difference.
int shd_pattern(const Pdag& estimated, const Pdag& truth);

}  // namespace osem
