#pragma once

#include <cstdint>
#include <vector>

#include "embmf/data.hpp"

namespace embmf {

// Seeded generator of MovieLens-like interaction data: a latent-factor
// ground truth produces integer ratings on [rating_min, rating_max], item
// popularity is heavy-tailed, and each user's clicked set is biased toward
// the user's taste, so co-click structure carries real signal about item
// similarity.
//
// Clicking and rating are related but not interchangeable: only
// click_shared_dims of the true_dim rating factors drive click behaviour,
// the rest of the click utility lives in click-only directions. Co-click
// embeddings therefore transfer part of the rating structure, never all of
// it, which is what makes the tether strength a real trade-off.
struct SynthConfig {
    int n_users = 6040;
    int n_items = 3706;
    std::int64_t n_events = 1'000'209;
    int true_dim = 8;
    double factor_decay = 0.65;     // geometric decay of per-dim factor variance
    int click_skip_top_dims = 1;    // strongest rating dims hidden from clicks
    int click_shared_dims = 4;      // rating dims visible to the click channel
    int click_private_dims = 16;    // click-only dims; keeping the click space
                                    // at least as wide as the model keeps the
                                    // tether binding in every direction
    double click_private_var = 0.016;  // squared-variance (s^4) per private dim
    double click_distortion = 0.5;  // per-item noise on the shared dims,
                                    // relative to each dim's factor scale
    double mu = 3.6;
    double user_bias_sd = 0.45;
    double item_bias_sd = 0.55;
    double interaction_sd = 0.6;   // sd of theta*.beta* per rating
    double noise_sd = 0.7;
    double affinity = 1.0;         // how strongly clicks follow click utility
    double popularity_exponent = 0.8;
    int min_events_per_user = 20;
    double rating_min = 1.0;
    double rating_max = 5.0;
    std::uint64_t seed = 77;
};

std::vector<InteractionRecord> generate_interactions(const SynthConfig& config);

}  // namespace embmf
