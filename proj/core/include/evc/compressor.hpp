#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evc/evi_net.hpp"
#include "evc/train.hpp"
#include "evc/vanilla_net.hpp"

namespace evc {

inline constexpr double kZeroKernelThreshold = 1e-7;

/// sqrt(Tr(K K^T)) = root of the sum of squared entries, accumulated in double.
double frobenius_norm(std::span<const float> kernel);

struct KernelRankEntry {
    std::size_t index = 0;
    double norm = 0.0;
    std::optional<double> sigma2;  // absent for vanilla kernels
};

/// Entries sorted by ascending norm (ties by index).
struct KernelRanking {
    std::vector<KernelRankEntry> entries;
};

/// Bayesian kernels are ranked by the norm of their posterior mean.
KernelRanking rank_kernels(const BayesianNet& net);
KernelRanking rank_kernels(const VanillaNet& net);

/// Indices (ascending) whose norm is <= threshold.
std::vector<std::size_t> identify_zero_kernels(const KernelRanking& ranking,
                                               double threshold = kZeroKernelThreshold);

/// Removes the listed kernels and the FC columns fed by their pooled maps.
BayesianNet prune(const BayesianNet& net, std::span<const std::size_t> indices);
VanillaNet prune(const VanillaNet& net, std::span<const std::size_t> indices);

struct StorageReport {
    std::size_t params = 0;
    std::size_t bytes = 0;
    double kb = 0.0;

    std::string kb_text() const;  // two decimals
};

/// Convolution-parameter storage: (d^2 + 1) N for Bayesian, d^2 N for vanilla; 4 bytes each.
StorageReport storage_report(ModelKind kind, std::size_t kernels, std::size_t kernel_size);

struct CompressionReport {
    ModelKind kind = ModelKind::bayesian;
    std::size_t kernels = 0;
    std::size_t kernel_size = 0;
    double threshold = kZeroKernelThreshold;
    std::vector<std::size_t> zero_indices;
    std::size_t zero_count = 0;
    std::optional<double> mean_sigma2_zero;     // Bayesian only, absent when the set is empty
    std::optional<double> mean_sigma2_nonzero;
    StorageReport conv_storage;
    StorageReport full_storage;  // every parameter including FC blocks
};

CompressionReport compression_report(const BayesianNet& net, double threshold = kZeroKernelThreshold);
CompressionReport compression_report(const VanillaNet& net, double threshold = kZeroKernelThreshold);

struct CycleRecord {
    std::size_t cycle = 0;
    std::size_t n_before = 0;
    std::size_t zero_count = 0;
    std::size_t n_after = 0;
    double test_acc = 0.0;
    double storage_kb = 0.0;  // convolution storage at n_after
};

struct CompressionTrace {
    std::vector<CycleRecord> cycles;
};

struct CompressConfig {
    TrainConfig train;
    double threshold = kZeroKernelThreshold;
    bool warm_start = true;
    std::size_t max_cycles = 64;
};

template <typename Net>
struct CompressResult {
    CompressionTrace trace;
    Net net;  // model trained in the final cycle
    std::vector<TrainHistory> histories;
    std::vector<KernelRanking> rankings;
};

struct CycleEvent {
    const CycleRecord& record;
    const TrainHistory& history;
    const KernelRanking& ranking;
};
using CycleCallback = std::function<void(const CycleEvent&)>;

/// Train, rank, drop zero kernels, retrain; stops when a cycle finds no zero
/// kernels or one kernel is left. At least one kernel always survives.
CompressResult<BayesianNet> iterative_compress(const Dataset& train_set, const Dataset& test_set,
                                               std::size_t start_kernels, const CompressConfig& cfg,
                                               const CycleCallback& on_cycle = {},
                                               const EpochCallback& on_epoch = {});
CompressResult<VanillaNet> iterative_compress_vanilla(const Dataset& train_set, const Dataset& test_set,
                                                      std::size_t start_kernels, const CompressConfig& cfg,
                                                      const CycleCallback& on_cycle = {},
                                                      const EpochCallback& on_epoch = {});

/// kernel_index,frobenius_norm,sigma2 (sigma2 blank for vanilla), in kernel order.
void write_kernel_norms_csv(std::ostream& out, const KernelRanking& ranking);
void write_kernel_norms_csv(const std::filesystem::path& path, const KernelRanking& ranking);

/// cycle,n_before,zero_count,n_after,test_acc,storage_kb
void write_trace_csv(std::ostream& out, const CompressionTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const CompressionTrace& trace);

}  // namespace evc
