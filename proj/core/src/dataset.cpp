#include "evc/dataset.hpp"

#include <numeric>

#include "evc/errors.hpp"
#include "evc/idx.hpp"
#include "evc/rng.hpp"

namespace evc {

std::string to_string(DatasetName name) {
    return name == DatasetName::mnist ? "mnist" : "fmnist";
}

DatasetName parse_dataset_name(const std::string& s) {
    if (s == "mnist") return DatasetName::mnist;
    if (s == "fmnist") return DatasetName::fmnist;
    throw DomainError("unknown dataset '" + s + "' (expected mnist or fmnist)");
}

Dataset::Dataset(std::string name, Tensor images, std::vector<std::uint8_t> labels)
    : name_(std::move(name)), images_(std::move(images)), labels_(std::move(labels)) {
    if (images_.rank() == 0 && labels_.empty()) return;
    if (images_.rank() != 3) {
        throw DimensionError("dataset images must be [count x rows x cols], got " +
                             shape_string(images_.shape()));
    }
    if (images_.dim(0) != labels_.size()) {
        throw DimensionError("dataset has " + std::to_string(images_.dim(0)) + " images but " +
                             std::to_string(labels_.size()) + " labels");
    }
    rows_ = images_.dim(1);
    cols_ = images_.dim(2);
    for (std::uint8_t l : labels_) {
        if (l > 9) throw DomainError("label " + std::to_string(l) + " outside 0..9");
    }
}

std::span<const float> Dataset::image(std::size_t i) const {
    const std::size_t n = rows() * cols();
    return images_.data().subspan(i * n, n);
}

std::filesystem::path images_file(const std::filesystem::path& dir, Split split) {
    return dir / (split == Split::train ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte");
}

std::filesystem::path labels_file(const std::filesystem::path& dir, Split split) {
    return dir / (split == Split::train ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte");
}

Dataset load_dataset(const std::filesystem::path& dir, DatasetName name, Split split) {
    auto images = idx::parse_images(idx::read_file(images_file(dir, split)));
    auto labels = idx::parse_labels(idx::read_file(labels_file(dir, split)));
    return Dataset(to_string(name), std::move(images), std::move(labels));
}

BatchPlan make_batch_plan(std::size_t dataset_size, std::size_t batch_size, std::uint64_t epoch_seed) {
    if (dataset_size == 0) throw DomainError("make_batch_plan: empty dataset");
    if (batch_size == 0 || batch_size > dataset_size) {
        throw DomainError("make_batch_plan: batch size " + std::to_string(batch_size) +
                          " must be in [1, " + std::to_string(dataset_size) + "]");
    }
    BatchPlan plan{batch_size, epoch_seed, std::vector<std::size_t>(dataset_size)};
    std::iota(plan.order.begin(), plan.order.end(), std::size_t{0});
    RngStream rng(epoch_seed, stream_id("batch-order"));
    for (std::size_t i = dataset_size - 1; i > 0; --i) {
        std::swap(plan.order[i], plan.order[rng.below(i + 1)]);
    }
    return plan;
}

std::vector<Batch> batches(const Dataset& dataset, const BatchPlan& plan) {
    if (dataset.size() == 0) throw DomainError("batches: empty dataset");
    if (plan.order.size() != dataset.size()) {
        throw DimensionError("batch plan covers " + std::to_string(plan.order.size()) +
                             " samples, dataset has " + std::to_string(dataset.size()));
    }
    std::vector<Batch> out;
    out.reserve((plan.order.size() + plan.batch_size - 1) / plan.batch_size);
    for (std::size_t start = 0; start < plan.order.size(); start += plan.batch_size) {
        const std::size_t end = std::min(start + plan.batch_size, plan.order.size());
        Batch b;
        b.images.reserve(end - start);
        b.labels.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) {
            b.images.push_back(dataset.image(plan.order[i]));
            b.labels.push_back(dataset.label(plan.order[i]));
        }
        out.push_back(std::move(b));
    }
    return out;
}

}  // namespace evc
