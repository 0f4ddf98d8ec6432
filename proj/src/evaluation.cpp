#include "asvs/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "asvs/errors.hpp"
#include "asvs/rng.hpp"

namespace asvs {

std::vector<double> global_variance(std::span<const std::vector<float>> utterances,
                                    std::size_t dims, std::size_t used_dims,
                                    std::size_t* excluded) {
  if (utterances.empty()) throw ValidationError("global variance of an empty set");
  if (used_dims > dims) throw DimensionError("more GV dimensions requested than available");
  std::vector<double> gv(used_dims, 0.0);
  std::size_t used = 0, skipped = 0;
  std::vector<double> mean(used_dims), m2(used_dims);
  for (const auto& u : utterances) {
    if (u.size() % dims != 0)
      throw DimensionError("utterance of " + std::to_string(u.size()) +
                           " values is not a whole number of " + std::to_string(dims) +
                           "-dim frames");
    const std::size_t frames = u.size() / dims;
    if (frames < 2) {
      ++skipped;
      continue;
    }
    // Welford's update, one pass per utterance.
    std::fill(mean.begin(), mean.end(), 0.0);
    std::fill(m2.begin(), m2.end(), 0.0);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t d = 0; d < used_dims; ++d) {
        const double x = u[t * dims + d];
        const double delta = x - mean[d];
        mean[d] += delta / static_cast<double>(t + 1);
        m2[d] += delta * (x - mean[d]);
      }
    }
    for (std::size_t d = 0; d < used_dims; ++d) gv[d] += m2[d] / static_cast<double>(frames);
    ++used;
  }
  if (skipped) std::cerr << "warning: global variance skipped " << skipped
                         << " utterance(s) shorter than two frames\n";
  if (excluded) *excluded = skipped;
  if (used == 0) throw ValidationError("global variance: no utterance has two or more frames");
  for (auto& g : gv) g /= static_cast<double>(used);
  return gv;
}

void write_gv_csv(const std::filesystem::path& path, const GvReport& report) {
  if (report.generated.size() != report.reference.size())
    throw DimensionError("GV report columns differ in length");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "dim,gv_generated,gv_reference\n";
  char buf[96];
  for (std::size_t d = 0; d < report.generated.size(); ++d) {
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g\n", d, report.generated[d],
                  report.reference[d]);
    out << buf;
  }
}

GvReport read_gv_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "dim,gv_generated,gv_reference")
    throw ValidationError(path.string() + ": unexpected GV header '" + line + "'");
  GvReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t dim = 0;
    double g = 0, r = 0;
    if (std::sscanf(line.c_str(), "%zu,%lf,%lf", &dim, &g, &r) != 3 ||
        dim != report.generated.size())
      throw ValidationError(path.string() + ": bad GV row '" + line + "'");
    report.generated.push_back(g);
    report.reference.push_back(r);
  }
  return report;
}

void write_feature_dump(const std::filesystem::path& path, const std::vector<float>& features,
                        std::size_t frames, std::size_t n_mgc, std::size_t n_bap) {
  const std::size_t dims = n_mgc + n_bap + 1;
  if (features.size() != frames * dims)
    throw DimensionError("feature dump: buffer does not hold " + std::to_string(frames) + "x" +
                         std::to_string(dims) + " values");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "frame";
  for (std::size_t d = 0; d < n_mgc; ++d) out << ",mgc" << d;
  for (std::size_t d = 0; d < n_bap; ++d) out << ",bap" << d;
  out << ",vuv\n";
  char buf[32];
  for (std::size_t t = 0; t < frames; ++t) {
    out << t;
    for (std::size_t d = 0; d < dims; ++d) {
      std::snprintf(buf, sizeof buf, ",%.9g", static_cast<double>(features[t * dims + d]));
      out << buf;
    }
    out << "\n";
  }
}

std::vector<double> mean_pool(std::span<const float> rows, std::size_t dim) {
  if (dim == 0 || rows.empty() || rows.size() % dim != 0)
    throw DimensionError("mean_pool needs a non-empty [len x " + std::to_string(dim) + "] buffer");
  const std::size_t len = rows.size() / dim;
  std::vector<double> out(dim, 0.0);
  for (std::size_t t = 0; t < len; ++t)
    for (std::size_t d = 0; d < dim; ++d) out[d] += rows[t * dim + d];
  for (auto& v : out) v /= static_cast<double>(len);
  return out;
}

namespace {

struct Softmax {
  std::size_t dim, classes;
  std::vector<double> w;  // [classes x (dim + 1)], last column is the bias

  Softmax(std::size_t d, std::size_t c) : dim(d), classes(c), w(c * (d + 1), 0.0) {}

  void scores(const std::vector<double>& x, std::vector<double>& p) const {
    double top = -1e300;
    for (std::size_t k = 0; k < classes; ++k) {
      const double* row = &w[k * (dim + 1)];
      double s = row[dim];
      for (std::size_t d = 0; d < dim; ++d) s += row[d] * x[d];
      p[k] = s;
      top = std::max(top, s);
    }
    double z = 0;
    for (auto& v : p) z += (v = std::exp(v - top));
    for (auto& v : p) v /= z;
  }

  std::size_t predict(const std::vector<double>& x) const {
    std::vector<double> p(classes);
    scores(x, p);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  }

  void fit(const std::vector<std::vector<double>>& xs, const std::vector<std::size_t>& ys,
           const ProbeOptions& opt) {
    std::vector<double> grad(w.size()), p(classes);
    const double inv_n = 1.0 / static_cast<double>(xs.size());
    for (std::size_t it = 0; it < opt.iterations; ++it) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        scores(xs[i], p);
        p[ys[i]] -= 1.0;
        for (std::size_t k = 0; k < classes; ++k) {
          double* g = &grad[k * (dim + 1)];
          for (std::size_t d = 0; d < dim; ++d) g[d] += p[k] * xs[i][d];
          g[dim] += p[k];
        }
      }
      for (std::size_t j = 0; j < w.size(); ++j) {
        const bool bias = j % (dim + 1) == dim;
        w[j] -= opt.learning_rate * (grad[j] * inv_n + (bias ? 0.0 : opt.l2 * w[j]));
      }
    }
  }
};

}  // namespace

ProbeResult singer_probe(const std::vector<std::vector<double>>& features,
                         const std::vector<std::size_t>& labels, const ProbeOptions& opt) {
  if (features.size() != labels.size())
    throw ValidationError("probe: " + std::to_string(features.size()) + " samples, " +
                          std::to_string(labels.size()) + " labels");
  const std::set<std::size_t> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw ValidationError("singer probe needs at least two singers");
  const std::size_t n = features.size(), dim = features.front().size();
  for (const auto& f : features)
    if (f.size() != dim) throw DimensionError("probe features differ in length");
  const std::size_t classes = *distinct.rbegin() + 1;
  const std::size_t folds = std::clamp<std::size_t>(opt.folds, 2, n);

  // Stratified assignment: shuffle each class, then deal its members round-robin.
  Rng rng(opt.seed);
  std::vector<std::size_t> fold_of(n);
  std::size_t dealt = 0;
  for (std::size_t c : distinct) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] == c) members.push_back(i);
    for (std::size_t i = members.size(); i > 1; --i)
      std::swap(members[i - 1], members[rng.index(i)]);
    for (auto i : members) fold_of[i] = dealt++ % folds;
  }

  std::size_t correct = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? test : train).push_back(i);
    if (test.empty() || train.empty()) continue;
    std::vector<double> mu(dim, 0.0), sd(dim, 0.0);
    for (auto i : train)
      for (std::size_t d = 0; d < dim; ++d) mu[d] += features[i][d];
    for (auto& m : mu) m /= static_cast<double>(train.size());
    for (auto i : train)
      for (std::size_t d = 0; d < dim; ++d) sd[d] += std::pow(features[i][d] - mu[d], 2);
    for (auto& s : sd) s = std::sqrt(s / static_cast<double>(train.size())) + 1e-8;
    auto standardise = [&](std::size_t i) {
      std::vector<double> x(dim);
      for (std::size_t d = 0; d < dim; ++d) x[d] = (features[i][d] - mu[d]) / sd[d];
      return x;
    };
    std::vector<std::vector<double>> xs;
    std::vector<std::size_t> ys;
    for (auto i : train) {
      xs.push_back(standardise(i));
      ys.push_back(labels[i]);
    }
    Softmax model(dim, classes);
    model.fit(xs, ys, opt);
    for (auto i : test) correct += model.predict(standardise(i)) == labels[i];
  }
  return {static_cast<double>(correct) / static_cast<double>(n), n, distinct.size(), folds};
}

}  // namespace asvs
