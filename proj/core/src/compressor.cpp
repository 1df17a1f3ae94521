#include "evc/compressor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <type_traits>

#include "evc/csv.hpp"
#include "evc/errors.hpp"
#include "evc/rng.hpp"

namespace evc {

double frobenius_norm(std::span<const float> kernel) {
    double sq = 0.0;
    for (float v : kernel) sq += static_cast<double>(v) * v;
    return std::sqrt(sq);
}

namespace {

void sort_ranking(KernelRanking& r) {
    std::stable_sort(r.entries.begin(), r.entries.end(),
                     [](const KernelRankEntry& a, const KernelRankEntry& b) { return a.norm < b.norm; });
}

std::vector<std::size_t> checked_removal(std::size_t kernels, std::span<const std::size_t> indices) {
    std::vector<std::size_t> sorted(indices.begin(), indices.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] >= kernels) {
            throw DomainError("prune: kernel index " + std::to_string(sorted[i]) + " out of range for " +
                              std::to_string(kernels) + " kernels");
        }
        if (i && sorted[i] == sorted[i - 1]) {
            throw DomainError("prune: kernel index " + std::to_string(sorted[i]) + " listed twice");
        }
    }
    if (sorted.size() >= kernels) throw DomainError("prune: cannot remove every kernel");
    return sorted;
}

// Copies the blocks of every surviving kernel into a layout for `kept` kernels.
std::vector<float> pruned_params(ModelKind kind, const Architecture& arch, std::span<const float> src,
                                 const std::vector<std::size_t>& removed, Architecture& out_arch) {
    std::vector<std::size_t> keep;
    for (std::size_t n = 0, r = 0; n < arch.kernels; ++n) {
        if (r < removed.size() && removed[r] == n) {
            ++r;
            continue;
        }
        keep.push_back(n);
    }
    out_arch = arch;
    out_arch.kernels = keep.size();
    const auto from = ParamLayout::of(kind, arch);
    const auto to = ParamLayout::of(kind, out_arch);
    const std::size_t area = arch.kernel_area(), pa = arch.pooled_area();
    const std::size_t f_old = arch.fc_inputs(), f_new = out_arch.fc_inputs();
    const bool bayes = kind == ModelKind::bayesian;

    std::vector<float> dst(to.total);
    for (std::size_t j = 0; j < keep.size(); ++j) {
        const std::size_t n = keep[j];
        std::copy_n(src.begin() + from.conv_mu + n * area, area, dst.begin() + to.conv_mu + j * area);
        if (bayes) dst[to.conv_rho + j] = src[from.conv_rho + n];
        for (std::size_t k = 0; k < arch.classes; ++k) {
            std::copy_n(src.begin() + from.fc_mu + k * f_old + n * pa, pa,
                        dst.begin() + to.fc_mu + k * f_new + j * pa);
        }
    }
    if (bayes) std::copy_n(src.begin() + from.fc_rho, arch.classes, dst.begin() + to.fc_rho);
    std::copy_n(src.begin() + from.fc_bias, arch.classes, dst.begin() + to.fc_bias);
    return dst;
}

}  // namespace

KernelRanking rank_kernels(const BayesianNet& net) {
    KernelRanking r;
    for (std::size_t n = 0; n < net.arch().kernels; ++n) {
        r.entries.push_back({n, frobenius_norm(net.kernel_mean(n)), static_cast<double>(net.kernel_sigma2(n))});
    }
    sort_ranking(r);
    return r;
}

KernelRanking rank_kernels(const VanillaNet& net) {
    KernelRanking r;
    for (std::size_t n = 0; n < net.arch().kernels; ++n) {
        r.entries.push_back({n, frobenius_norm(net.kernel(n)), std::nullopt});
    }
    sort_ranking(r);
    return r;
}

std::vector<std::size_t> identify_zero_kernels(const KernelRanking& ranking, double threshold) {
    std::vector<std::size_t> out;
    for (const auto& e : ranking.entries) {
        if (e.norm <= threshold) out.push_back(e.index);
    }
    std::sort(out.begin(), out.end());
    return out;
}

BayesianNet prune(const BayesianNet& net, std::span<const std::size_t> indices) {
    const auto removed = checked_removal(net.arch().kernels, indices);
    Architecture arch;
    auto params = pruned_params(ModelKind::bayesian, net.arch(), net.params(), removed, arch);
    return BayesianNet(arch, std::move(params));
}

VanillaNet prune(const VanillaNet& net, std::span<const std::size_t> indices) {
    const auto removed = checked_removal(net.arch().kernels, indices);
    Architecture arch;
    auto params = pruned_params(ModelKind::vanilla, net.arch(), net.params(), removed, arch);
    return VanillaNet(arch, std::move(params));
}

std::string StorageReport::kb_text() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", kb);
    return buf;
}

StorageReport storage_report(ModelKind kind, std::size_t kernels, std::size_t kernel_size) {
    if (kernels < 1 || kernel_size < 1) throw DomainError("storage_report: N and d must be >= 1");
    const std::size_t per_kernel = kernel_size * kernel_size + (kind == ModelKind::bayesian ? 1 : 0);
    StorageReport r;
    r.params = per_kernel * kernels;
    r.bytes = r.params * sizeof(float);
    r.kb = static_cast<double>(r.bytes) / 1024.0;
    return r;
}

namespace {

StorageReport bytes_of(std::size_t params) {
    return {params, params * sizeof(float), static_cast<double>(params * sizeof(float)) / 1024.0};
}

}  // namespace

CompressionReport compression_report(const BayesianNet& net, double threshold) {
    CompressionReport r;
    r.kind = ModelKind::bayesian;
    r.kernels = net.arch().kernels;
    r.kernel_size = net.arch().kernel_size;
    r.threshold = threshold;
    r.zero_indices = identify_zero_kernels(rank_kernels(net), threshold);
    r.zero_count = r.zero_indices.size();
    double zsum = 0.0, nsum = 0.0;
    for (std::size_t n = 0, z = 0; n < r.kernels; ++n) {
        if (z < r.zero_indices.size() && r.zero_indices[z] == n) {
            zsum += net.kernel_sigma2(n);
            ++z;
        } else {
            nsum += net.kernel_sigma2(n);
        }
    }
    if (r.zero_count) r.mean_sigma2_zero = zsum / static_cast<double>(r.zero_count);
    if (r.zero_count < r.kernels) r.mean_sigma2_nonzero = nsum / static_cast<double>(r.kernels - r.zero_count);
    r.conv_storage = storage_report(r.kind, r.kernels, r.kernel_size);
    r.full_storage = bytes_of(net.params().size());
    return r;
}

CompressionReport compression_report(const VanillaNet& net, double threshold) {
    CompressionReport r;
    r.kind = ModelKind::vanilla;
    r.kernels = net.arch().kernels;
    r.kernel_size = net.arch().kernel_size;
    r.threshold = threshold;
    r.zero_indices = identify_zero_kernels(rank_kernels(net), threshold);
    r.zero_count = r.zero_indices.size();
    r.conv_storage = storage_report(r.kind, r.kernels, r.kernel_size);
    r.full_storage = bytes_of(net.params().size());
    return r;
}

namespace {

BayesianNet fresh(const Architecture& a, std::uint64_t seed, const BayesianNet*) {
    return BayesianNet::initialized(a, seed);
}
VanillaNet fresh(const Architecture& a, std::uint64_t seed, const VanillaNet*) {
    return VanillaNet::initialized(a, seed);
}

TrainHistory train_any(BayesianNet& net, const Dataset& tr, const Dataset& te, const TrainConfig& cfg,
                       const EpochCallback& cb) {
    return train(net, tr, te, cfg, cb);
}
TrainHistory train_any(VanillaNet& net, const Dataset& tr, const Dataset& te, const TrainConfig& cfg,
                       const EpochCallback& cb) {
    return train_vanilla(net, tr, te, cfg, cb);
}

template <typename Net>
CompressResult<Net> compress_loop(const Dataset& train_set, const Dataset& test_set, std::size_t start_kernels,
                                  const CompressConfig& cfg, const CycleCallback& on_cycle,
                                  const EpochCallback& on_epoch) {
    if (start_kernels < 1) throw DomainError("iterative_compress: start kernels must be >= 1");
    if (!(cfg.threshold > 0.0)) throw DomainError("iterative_compress: threshold must be positive");
    const ModelKind kind = std::is_same_v<Net, BayesianNet> ? ModelKind::bayesian : ModelKind::vanilla;
    Architecture arch;
    arch.kernels = start_kernels;
    arch.input_size = train_set.rows();
    CompressResult<Net> result{{}, fresh(arch, cfg.train.seed, static_cast<const Net*>(nullptr)), {}, {}};
    for (std::size_t cycle = 1; cycle <= cfg.max_cycles; ++cycle) {
        TrainConfig tc = cfg.train;
        // Cycle 1 reproduces a plain training run with the same seed.
        if (cycle > 1) tc.seed = RngStream(cfg.train.seed, stream_id("cycle", cycle)).next_u64();
        auto history = train_any(result.net, train_set, test_set, tc, on_epoch);
        const double acc = history.epochs.empty() ? accuracy(result.net, test_set) : history.epochs.back().test_acc;
        auto ranking = rank_kernels(result.net);
        auto zeros = identify_zero_kernels(ranking, cfg.threshold);
        const std::size_t n = result.net.arch().kernels;
        if (zeros.size() >= n) {
            // Keep the highest-norm kernel so the model stays usable.
            zeros.erase(std::find(zeros.begin(), zeros.end(), ranking.entries.back().index));
        }
        CycleRecord rec{cycle, n, zeros.size(), n - zeros.size(), acc,
                        storage_report(kind, n - zeros.size(), arch.kernel_size).kb};
        result.trace.cycles.push_back(rec);
        result.histories.push_back(std::move(history));
        result.rankings.push_back(std::move(ranking));
        if (on_cycle) on_cycle({result.trace.cycles.back(), result.histories.back(), result.rankings.back()});
        if (zeros.empty() || cycle == cfg.max_cycles) break;
        if (cfg.warm_start) {
            result.net = prune(result.net, zeros);
        } else {
            Architecture next = result.net.arch();
            next.kernels = rec.n_after;
            result.net = fresh(next, cfg.train.seed, static_cast<const Net*>(nullptr));
        }
    }
    return result;
}

}  // namespace

CompressResult<BayesianNet> iterative_compress(const Dataset& train_set, const Dataset& test_set,
                                               std::size_t start_kernels, const CompressConfig& cfg,
                                               const CycleCallback& on_cycle, const EpochCallback& on_epoch) {
    return compress_loop<BayesianNet>(train_set, test_set, start_kernels, cfg, on_cycle, on_epoch);
}

CompressResult<VanillaNet> iterative_compress_vanilla(const Dataset& train_set, const Dataset& test_set,
                                                      std::size_t start_kernels, const CompressConfig& cfg,
                                                      const CycleCallback& on_cycle,
                                                      const EpochCallback& on_epoch) {
    return compress_loop<VanillaNet>(train_set, test_set, start_kernels, cfg, on_cycle, on_epoch);
}

void write_kernel_norms_csv(std::ostream& out, const KernelRanking& ranking) {
    auto entries = ranking.entries;
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
    out << "kernel_index,frobenius_norm,sigma2\n";
    for (const auto& e : entries) {
        out << e.index << ',' << csv::num(e.norm) << ',';
        if (e.sigma2) out << csv::num(*e.sigma2);
        out << '\n';
    }
}

void write_kernel_norms_csv(const std::filesystem::path& path, const KernelRanking& ranking) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_kernel_norms_csv(out, ranking);
}

void write_trace_csv(std::ostream& out, const CompressionTrace& trace) {
    out << "cycle,n_before,zero_count,n_after,test_acc,storage_kb\n";
    for (const auto& c : trace.cycles) {
        char kb[32];
        std::snprintf(kb, sizeof kb, "%.2f", c.storage_kb);
        out << c.cycle << ',' << c.n_before << ',' << c.zero_count << ',' << c.n_after << ','
            << csv::num(c.test_acc) << ',' << kb << '\n';
    }
}

void write_trace_csv(const std::filesystem::path& path, const CompressionTrace& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_trace_csv(out, trace);
}

}  // namespace evc
