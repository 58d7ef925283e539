#include "sage/toymodel.hpp"

#include <algorithm>
#include <cmath>

namespace sage {

ToyLM ToyLM::init(std::int64_t vocab, std::int64_t dim, Rng& rng) {
  if (vocab < 1 || dim < 1) {
    throw ConfigError("ToyLM: vocab and dim must be >= 1");
  }
  ToyLM model;
  model.vocab = vocab;
  model.dim = dim;
  const double stddev = 1.0 / std::sqrt(static_cast<double>(dim));
  model.embedding = gaussian_matrix(rng, static_cast<std::size_t>(vocab),
                                    static_cast<std::size_t>(dim), stddev);
  return model;
}

ZipfSampler::ZipfSampler(std::int64_t vocab, double exponent, std::uint64_t seed)
    : vocab_(vocab), exponent_(exponent), rng_(seed) {
  if (vocab_ < 1) {
    throw ConfigError("ZipfSampler: vocab must be >= 1");
  }
  probs_.resize(static_cast<std::size_t>(vocab_));
  cdf_.resize(static_cast<std::size_t>(vocab_));
  double total = 0.0;
  for (std::int64_t k = 0; k < vocab_; ++k) {
    probs_[static_cast<std::size_t>(k)] =
        1.0 / std::pow(static_cast<double>(k + 1), exponent_);
    total += probs_[static_cast<std::size_t>(k)];
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    probs_[k] /= total;
    acc += probs_[k];
    cdf_[k] = acc;
  }
  cdf_.back() = 1.0;
}

std::int64_t ZipfSampler::draw() {
  const double u = rng_.uniform01();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<std::int64_t>(it - cdf_.begin());
}

Batch sample_batch(ZipfSampler& sampler, std::int64_t batch_size) {
  if (batch_size < 1) {
    throw UsageError("sample_batch: batch size must be >= 1");
  }
  Batch batch;
  batch.contexts.reserve(static_cast<std::size_t>(batch_size));
  batch.targets.reserve(static_cast<std::size_t>(batch_size));
  for (std::int64_t b = 0; b < batch_size; ++b) {
    batch.contexts.push_back(sampler.draw());
    batch.targets.push_back(sampler.draw());
  }
  return batch;
}

namespace {

void validate_batch(const ToyLM& model, const Batch& batch) {
  if (batch.contexts.size() != batch.targets.size() || batch.contexts.empty()) {
    throw UsageError("batch: contexts and targets must be equal-length and non-empty");
  }
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (batch.contexts[b] < 0 || batch.contexts[b] >= model.vocab ||
        batch.targets[b] < 0 || batch.targets[b] >= model.vocab) {
      throw UsageError("batch: token id outside [0, vocab)");
    }
  }
}

// Shared forward/backward pass; logits are computed once per example.
double loss_and_gradient(const ToyLM& model, const Batch& batch, Matrix* grad_out) {
  if (!model.embedding.all_finite()) {
    throw InvalidValueError("toy model: non-finite parameter");
  }
  validate_batch(model, batch);

  const std::size_t vocab = static_cast<std::size_t>(model.vocab);
  const std::size_t dim = static_cast<std::size_t>(model.dim);
  const Matrix& emb = model.embedding;

  if (grad_out != nullptr) {
    *grad_out = Matrix(vocab, dim);
  }
  std::vector<double> logits(vocab);
  std::vector<double> probs(vocab);
  std::vector<double> lookup(dim);

  double total_loss = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const std::size_t x = static_cast<std::size_t>(batch.contexts[b]);
    const std::size_t y = static_cast<std::size_t>(batch.targets[b]);
    auto ex = emb.row(x);

    double max_logit = -HUGE_VAL;
    for (std::size_t k = 0; k < vocab; ++k) {
      auto ek = emb.row(k);
      double dot = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        dot += ek[j] * ex[j];
      }
      logits[k] = dot;
      max_logit = std::max(max_logit, dot);
    }
    double z = 0.0;
    for (std::size_t k = 0; k < vocab; ++k) {
      probs[k] = std::exp(logits[k] - max_logit);
      z += probs[k];
    }
    total_loss += std::log(z) + max_logit - logits[y];

    if (grad_out != nullptr) {
      std::fill(lookup.begin(), lookup.end(), 0.0);
      for (std::size_t k = 0; k < vocab; ++k) {
        const double delta = probs[k] / z - (k == y ? 1.0 : 0.0);
        auto gk = grad_out->row(k);
        auto ek = emb.row(k);
        for (std::size_t j = 0; j < dim; ++j) {
          gk[j] += delta * ex[j];        // projection side, every row
          lookup[j] += delta * ek[j];    // lookup side, row x only
        }
      }
      auto gx = grad_out->row(x);
      for (std::size_t j = 0; j < dim; ++j) {
        gx[j] += lookup[j];
      }
    }
  }

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  if (grad_out != nullptr) {
    for (double& v : grad_out->raw()) {
      v *= inv_batch;
    }
  }
  return total_loss * inv_batch;
}

}  // namespace

double forward_loss(const ToyLM& model, const Batch& batch) {
  return loss_and_gradient(model, batch, nullptr);
}

Matrix backward(const ToyLM& model, const Batch& batch) {
  Matrix grad;
  loss_and_gradient(model, batch, &grad);
  return grad;
}

Matrix fd_gradient(const ToyLM& model, const Batch& batch, double h) {
  if (!(h > 0.0)) {
    throw UsageError("fd_gradient: h must be positive");
  }
  ToyLM probe = model;
  Matrix grad(model.embedding.rows(), model.embedding.cols());
  for (std::size_t i = 0; i < grad.rows(); ++i) {
    for (std::size_t j = 0; j < grad.cols(); ++j) {
      const double original = probe.embedding(i, j);
      probe.embedding(i, j) = original + h;
      const double plus = forward_loss(probe, batch);
      probe.embedding(i, j) = original - h;
      const double minus = forward_loss(probe, batch);
      probe.embedding(i, j) = original;
      grad(i, j) = (plus - minus) / (2.0 * h);
    }
  }
  return grad;
}

RunLog train_run(const TrainSetup& setup) {
  if (setup.steps < 0) {
    throw ConfigError("train_run: steps must be >= 0");
  }
  if (setup.schedule.total_steps < setup.steps) {
    throw ConfigError("train_run: schedule covers fewer steps than requested");
  }
  if (setup.steps > 0) {
    setup.schedule.validate();
  }

  Rng init_rng(derive_seed(setup.seed, 1));
  ZipfSampler sampler(setup.dims.vocab, setup.zipf_exponent, derive_seed(setup.seed, 2));
  ToyLM model = ToyLM::init(setup.dims.vocab, setup.dims.dim, init_rng);

  RunLog log;
  log.policy = to_string(setup.policy);
  log.seed = setup.seed;
  log.lr = setup.schedule.eta_max;
  log.config_hash = setup.config_hash;
  log.vocab = setup.dims.vocab;
  log.dim = setup.dims.dim;
  log.batch = setup.dims.batch;
  log.steps = setup.steps;
  log.snapshot_every = setup.snapshot_every;
  log.zipf_exponent = setup.zipf_exponent;
  log.warmup_fraction = setup.schedule.warmup_fraction;

  HybridOptimizer optimizer(setup.policy, setup.schedule, setup.hybrid);
  optimizer.add_parameter("embedding", model.embedding, ParamRole::Embedding2D);

  Batch first = sample_batch(sampler, setup.dims.batch);
  const double initial_loss = forward_loss(model, first);
  log.records.push_back({0, initial_loss, 0.0, 0.0,
                         setup.steps == 0 ? RecordStatus::Completed : RecordStatus::Ok});

  for (std::int64_t t = 1; t <= setup.steps; ++t) {
    Batch batch = sample_batch(sampler, setup.dims.batch);
    Matrix grad;
    double loss = 0.0;
    bool broken = false;
    try {
      loss = loss_and_gradient(model, batch, &grad);
    } catch (const InvalidValueError&) {
      loss = std::nan("");
      broken = true;
    }
    if (broken || !std::isfinite(loss)) {
      log.records.push_back({t, loss, 0.0, 0.0, RecordStatus::Diverged});
      return log;
    }

    SlotGrad slot_grad;
    slot_grad.mat = &grad;
    StepReport report = optimizer.step({&slot_grad, 1});
    log.records.push_back({t, loss, report.eta, report.slots[0].update_inf_norm,
                           t == setup.steps ? RecordStatus::Completed : RecordStatus::Ok});
    if (setup.snapshot_every > 0 && t % setup.snapshot_every == 0 &&
        report.slots[0].h.has_value()) {
      log.snapshots.push_back({t, std::move(*report.slots[0].h)});
    }
  }
  return log;
}

}  // namespace sage
