#include "evc/train.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "evc/csv.hpp"
#include "evc/engine.hpp"
#include "evc/errors.hpp"
#include "evc/rng.hpp"

namespace evc {

void TrainConfig::validate() const {
    if (batch_size == 0) throw DomainError("batch-size must be positive");
    if (!(adam.lr > 0.0)) throw DomainError("lr must be positive");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
        throw DomainError("adam betas must be in [0, 1)");
    }
    if (!(adam.eps > 0.0)) throw DomainError("adam eps must be positive");
    if (!(prior.variance > 0.0)) throw DomainError("prior-var must be positive");
    if (!(kl_scale > 0.0)) throw DomainError("kl scale must be positive");
}

double kl_weight_for(const TrainConfig& cfg, std::size_t batch_len, std::size_t train_size) {
    const double w = cfg.kl_scale * static_cast<double>(batch_len) / static_cast<double>(train_size);
    return std::min(w, 1.0);
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
    return RngStream(seed, stream_id("shuffle", epoch)).next_u64();
}

namespace {

template <typename Step, typename Eval>
TrainHistory run_epochs(std::span<float> params, const Dataset& train_set, const TrainConfig& cfg,
                        const EpochCallback& on_epoch, Step&& step, Eval&& eval) {
    cfg.validate();
    TrainHistory history;
    if (cfg.epochs == 0) return history;
    if (train_set.size() == 0) throw DomainError("train: empty training set");
    const std::size_t batch_size = std::min(cfg.batch_size, train_set.size());
    AdamState adam(params.size());
    std::vector<float> grad(params.size());
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        const auto plan = make_batch_plan(train_set.size(), batch_size, epoch_seed(cfg.seed, e));
        double total = 0.0, kl = 0.0, nll = 0.0;
        const auto all = batches(train_set, plan);
        for (const Batch& b : all) {
            const auto [t, k, n] = step(b, std::span<float>(grad));
            total += t;
            kl += k;
            nll += n;
            adam_step(params, grad, adam, cfg.adam);
        }
        const double nb = static_cast<double>(all.size());
        EpochRecord rec{e + 1, total / nb, kl / nb, nll / nb, eval()};
        history.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return history;
}

struct StepLoss {
    double total, kl, nll;
};

}  // namespace

TrainHistory train(BayesianNet& net, const Dataset& train_set, const Dataset& test_set, const TrainConfig& cfg,
                   const EpochCallback& on_epoch) {
    engine::BayesState<float> state(net.arch());
    auto step = [&](const Batch& b, std::span<float> grad) {
        const double kl_weight = kl_weight_for(cfg, b.size(), train_set.size());
        const ElboValue v = evaluate_elbo<float>(net.arch(), net.params(), b, cfg.prior, kl_weight, state, grad);
        return StepLoss{v.total, v.kl_weight * v.kl, v.nll};
    };
    return run_epochs(net.params(), train_set, cfg, on_epoch, step, [&] { return accuracy(net, test_set); });
}

TrainHistory train_vanilla(VanillaNet& net, const Dataset& train_set, const Dataset& test_set,
                           const TrainConfig& cfg, const EpochCallback& on_epoch) {
    engine::VanillaState<float> state(net.arch());
    auto step = [&](const Batch& b, std::span<float> grad) {
        const double ce = evaluate_cross_entropy<float>(net.arch(), net.params(), b, state, grad);
        return StepLoss{ce, 0.0, ce};
    };
    return run_epochs(net.params(), train_set, cfg, on_epoch, step, [&] { return accuracy(net, test_set); });
}

double accuracy(const BayesianNet& net, const Dataset& data) {
    if (data.size() == 0) return 0.0;
    engine::BayesState<float> s(net.arch());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        engine::bayes_forward<float>(net.arch(), net.params(), data.image(i), s);
        const auto best = std::max_element(s.probs.begin(), s.probs.end()) - s.probs.begin();
        correct += best == data.label(i);
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

double accuracy(const VanillaNet& net, const Dataset& data) {
    if (data.size() == 0) return 0.0;
    engine::VanillaState<float> s(net.arch());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        engine::vanilla_forward<float>(net.arch(), net.params(), data.image(i), s);
        const auto best = std::max_element(s.probs.begin(), s.probs.end()) - s.probs.begin();
        correct += best == data.label(i);
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
    out << "epoch,loss_total,loss_kl,loss_nll,test_acc\n";
    for (const auto& r : history.epochs) {
        out << r.epoch << ',' << csv::num(r.loss_total) << ',' << csv::num(r.loss_kl) << ','
            << csv::num(r.loss_nll) << ',' << csv::num(r.test_acc) << '\n';
    }
}

void write_history_csv(const std::filesystem::path& path, const TrainHistory& history) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_history_csv(out, history);
}

}  // namespace evc
