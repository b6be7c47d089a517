#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hge/data.hpp"
#include "hge/types.hpp"

namespace hge {

// Planted-hierarchy generator. A balanced category tree gets one latent
// vector per top-level category; each level down perturbs its parent with
// Gaussian noise whose scale halves per level, and items perturb their leaf
// center by `noise`. Users are standard Gaussians; each user's interactions
// are `interactions_per_user` distinct items drawn by softmax sampling over
// the user-item dot products, with timestamps uniform over `span_days`.
struct SynthParams {
  Index n_users = 2000;
  Index n_items = 1000;
  int n_levels = 2;
  std::vector<int> branching = {10, 5};  // top-level count, then children per node
  int d_true = 8;
  double noise = 0.25;
  int interactions_per_user = 25;
  int span_days = 90;
  double temperature = 1.0;  // divides scores before the softmax
};

// `item_latents`, when given, receives the planted item vectors (one row per
// item, in item-id order) so callers can check the planted geometry.
std::pair<InteractionLog, Hierarchy> synth_generate(const SynthParams& p, std::uint64_t seed,
                                                    MatD* item_latents = nullptr);

}  // namespace hge
