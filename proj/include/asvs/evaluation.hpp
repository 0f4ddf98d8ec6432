#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace asvs {

/// Per-dimension variance over the frames of each utterance (population
/// variance), averaged over utterances. Only the first `used_dims` columns
/// of each row-major [frames x dims] buffer are reported. Utterances with
/// fewer than two frames are skipped with a warning; `excluded` receives
/// their count. Throws ValidationError when nothing is left.
std::vector<double> global_variance(std::span<const std::vector<float>> utterances,
                                    std::size_t dims, std::size_t used_dims,
                                    std::size_t* excluded = nullptr);

struct GvReport {
  std::vector<double> generated;
  std::vector<double> reference;
};

/// `dim,gv_generated,gv_reference`, one row per dimension, 12 significant
/// digits. An empty report gives a header-only file.
void write_gv_csv(const std::filesystem::path& path, const GvReport& report);
GvReport read_gv_csv(const std::filesystem::path& path);

/// Frame-major CSV with a `frame,mgc0,...,bap0,...,vuv` header.
void write_feature_dump(const std::filesystem::path& path, const std::vector<float>& features,
                        std::size_t frames, std::size_t n_mgc, std::size_t n_bap);

struct ProbeOptions {
  std::size_t folds = 10;
  std::size_t iterations = 300;
  double learning_rate = 0.5;
  double l2 = 1e-3;
  std::uint64_t seed = 1;
};

struct ProbeResult {
  double accuracy = 0;
  std::size_t samples = 0;
  std::size_t classes = 0;
  std::size_t folds = 0;
};

/// Held-out accuracy of a multinomial logistic regression trained on
/// standardised features with stratified k-fold cross-validation.
/// Throws ValidationError with fewer than two classes.
ProbeResult singer_probe(const std::vector<std::vector<double>>& features,
                         const std::vector<std::size_t>& labels, const ProbeOptions& options = {});

/// Average of the rows of a row-major [len x dim] buffer.
std::vector<double> mean_pool(std::span<const float> rows, std::size_t dim);

}  // namespace asvs
