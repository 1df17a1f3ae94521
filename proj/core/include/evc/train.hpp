#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "evc/adam.hpp"
#include "evc/dataset.hpp"
#include "evc/elbo.hpp"
#include "evc/evi_net.hpp"
#include "evc/vanilla_net.hpp"

namespace evc {

struct TrainConfig {
    std::size_t epochs = 15;
    std::size_t batch_size = 64;
    AdamConfig adam;
    PriorSpec prior;
    std::uint64_t seed = 1;
    // Multiplier on the per-batch KL weight batch_size / train_size; the
    // effective weight is clamped to (0, 1].
    double kl_scale = 1.0;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double loss_total = 0.0;  // mean over batches
    double loss_kl = 0.0;     // mean weighted KL term (0 for vanilla)
    double loss_nll = 0.0;    // mean data term (cross-entropy for vanilla)
    double test_acc = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// KL weight of one batch: kl_scale * batch_len / train_size, clamped to (0, 1].
/// Over an epoch the unscaled weights sum to exactly one.
double kl_weight_for(const TrainConfig& cfg, std::size_t batch_len, std::size_t train_size);

/// Seed of the shuffle for a given epoch, derived from the run seed.
std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch);

/// Minibatch Adam on the ELBO; test accuracy is evaluated after every epoch.
TrainHistory train(BayesianNet& net, const Dataset& train_set, const Dataset& test_set, const TrainConfig& cfg,
                   const EpochCallback& on_epoch = {});

/// Minibatch Adam on cross-entropy with the same batching and seeding.
TrainHistory train_vanilla(VanillaNet& net, const Dataset& train_set, const Dataset& test_set,
                           const TrainConfig& cfg, const EpochCallback& on_epoch = {});

double accuracy(const BayesianNet& net, const Dataset& data);
double accuracy(const VanillaNet& net, const Dataset& data);

/// epoch,loss_total,loss_kl,loss_nll,test_acc with 6 significant digits.
void write_history_csv(std::ostream& out, const TrainHistory& history);
void write_history_csv(const std::filesystem::path& path, const TrainHistory& history);

}  // namespace evc
