#pragma once

#include <cstdint>
#include <vector>

#include "sage/matrix.hpp"
#include "sage/optimizers.hpp"
#include "sage/rng.hpp"
#include "sage/runlog.hpp"

namespace sage {

/// Tied-embedding bigram language model: one V x d matrix serves as both the
/// input lookup table and the output projection. Logits for context token x
/// are E * E_x, so the loss gradient has a dense projection part on every row
/// and a lookup part only on rows seen in the batch.
struct ToyLM {
  std::int64_t vocab = 0;
  std::int64_t dim = 0;
  Matrix embedding;

  /// Gaussian init with stddev 1/sqrt(dim).
  static ToyLM init(std::int64_t vocab, std::int64_t dim, Rng& rng);
};

/// Token sampler with p_k proportional to 1/(k+1)^exponent for ids k = 0..V-1
/// (id 0 is the most frequent).
class ZipfSampler {
 public:
  ZipfSampler(std::int64_t vocab, double exponent, std::uint64_t seed);

  std::int64_t draw();
  std::int64_t vocab() const { return vocab_; }
  double exponent() const { return exponent_; }
  const std::vector<double>& probabilities() const { return probs_; }
  Rng& rng() { return rng_; }

 private:
  std::int64_t vocab_ = 0;
  double exponent_ = 1.0;
  std::vector<double> probs_;
  std::vector<double> cdf_;
  Rng rng_;
};

struct Batch {
  std::vector<std::int64_t> contexts;
  std::vector<std::int64_t> targets;
  std::size_t size() const { return contexts.size(); }
};

/// B i.i.d. (context, target) pairs, both drawn from the Zipf law.
Batch sample_batch(ZipfSampler& sampler, std::int64_t batch_size);

/// Mean cross-entropy of the batch under the model (log-sum-exp stabilized).
double forward_loss(const ToyLM& model, const Batch& batch);

/// Exact analytic gradient of forward_loss with respect to the embedding,
/// including both the projection-side and lookup-side contributions of the
/// tied matrix.
Matrix backward(const ToyLM& model, const Batch& batch);

/// Central-difference gradient estimate, entry by entry. Verification only.
Matrix fd_gradient(const ToyLM& model, const Batch& batch, double h);

struct ToyDims {
  std::int64_t vocab = 512;
  std::int64_t dim = 32;
  std::int64_t batch = 64;
};

struct TrainSetup {
  Policy policy = Policy::SageHybrid;
  ToyDims dims;
  double zipf_exponent = 1.0;
  LrSchedule schedule;
  std::int64_t steps = 0;
  std::uint64_t seed = 0;
  std::int64_t snapshot_every = 0;  // 0 disables snapshots
  HybridConfig hybrid;
  std::uint64_t config_hash = 0;  // recorded in the log header
};

/// Runs sample -> forward -> backward -> hybrid step for `steps` steps and
/// returns the full log. Deterministic per seed. A non-finite loss ends the
/// run with a diverged record instead of raising.
RunLog train_run(const TrainSetup& setup);

}  // namespace sage
