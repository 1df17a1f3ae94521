#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "evc/tensor.hpp"

namespace evc {

enum class DatasetName { mnist, fmnist };
enum class Split { train, test };

std::string to_string(DatasetName name);
DatasetName parse_dataset_name(const std::string& s);

/// Normalized images [count x rows x cols] in [0,1] plus class ids 0..9.
/// A default-constructed images tensor with no labels gives an empty dataset.
class Dataset {
public:
    Dataset(std::string name, Tensor images, std::vector<std::uint8_t> labels);

    const std::string& name() const noexcept { return name_; }
    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    const Tensor& images() const noexcept { return images_; }
    std::span<const std::uint8_t> labels() const noexcept { return labels_; }

    std::span<const float> image(std::size_t i) const;
    int label(std::size_t i) const { return labels_[i]; }

private:
    std::string name_;
    Tensor images_;
    std::vector<std::uint8_t> labels_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
};

/// Standard file names inside a dataset directory.
std::filesystem::path images_file(const std::filesystem::path& dir, Split split);
std::filesystem::path labels_file(const std::filesystem::path& dir, Split split);

/// Loads one split of a dataset from the four standard IDX files in `dir`.
Dataset load_dataset(const std::filesystem::path& dir, DatasetName name, Split split);

struct BatchPlan {
    std::size_t batch_size;
    std::uint64_t epoch_seed;
    std::vector<std::size_t> order;
};

/// Fisher-Yates permutation of [0, dataset_size) driven by epoch_seed.
BatchPlan make_batch_plan(std::size_t dataset_size, std::size_t batch_size, std::uint64_t epoch_seed);

struct Batch {
    std::vector<std::span<const float>> images;
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
};

/// Splits plan.order into consecutive batches; the last batch may be partial.
std::vector<Batch> batches(const Dataset& dataset, const BatchPlan& plan);

}  // namespace evc
