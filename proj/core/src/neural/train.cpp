#include "usdbf/neural/train.hpp"

#include <cmath>
#include <numeric>

#include "usdbf/errors.hpp"
#include "usdbf/util/rng.hpp"

namespace usdbf::nn {

void TrainConfig::validate() const {
  if (weight_decay < 0.0) throw ConfigError("train: weight decay must be >= 0");
  if (lr_initial <= 0.0 || lr_final <= 0.0)
    throw ConfigError("train: learning rates must be positive");
  if (lr_final > lr_initial)
    throw ConfigError("train: lr_final must not exceed lr_initial");
  if (epochs < 1) throw ConfigError("train: need at least one epoch");
  if (batch_size < 1) throw ConfigError("train: batch size must be positive");
}

double lr_at_epoch(const TrainConfig& tc, int epoch) {
  if (tc.epochs <= 1) return tc.lr_initial;
  const double t = static_cast<double>(epoch) / (tc.epochs - 1);
  return tc.lr_initial * std::pow(tc.lr_final / tc.lr_initial, t);
}

namespace {

Tensor gather_batch(const std::vector<Sample>& dataset,
                    const std::vector<std::size_t>& order, std::size_t begin,
                    std::size_t end, bool targets) {
  const Tensor& first =
      targets ? dataset[order[begin]].target : dataset[order[begin]].input;
  Tensor batch(static_cast<int>(end - begin), first.c, first.h, first.w);
  for (std::size_t k = begin; k < end; ++k) {
    const Tensor& t = targets ? dataset[order[k]].target : dataset[order[k]].input;
    if (t.c != first.c || t.h != first.h || t.w != first.w)
      throw DimensionError("train: inconsistent sample shapes");
    std::copy(t.v.begin(), t.v.end(),
              batch.v.begin() + static_cast<std::ptrdiff_t>(
                                    (k - begin) * t.size()));
  }
  return batch;
}

}  // namespace

TrainResult train(Network& net, const std::vector<Sample>& dataset,
                  const TrainConfig& tc) {
  tc.validate();
  if (dataset.empty()) throw DataError("train: empty dataset");
  net.mode = Mode::kTrain;

  TrainResult result;
  result.epoch_losses.reserve(static_cast<std::size_t>(tc.epochs));

  Network last_good = net;

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    const double lr = lr_at_epoch(tc, epoch);
    Rng rng(derive_seed(tc.seed, static_cast<std::uint64_t>(epoch), 0x7261696e));
    rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    bool ok = true;

    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(tc.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(tc.batch_size));
      Tensor input = gather_batch(dataset, order, begin, end, false);
      Tensor target = gather_batch(dataset, order, begin, end, true);

      ForwardCache cache;
      Tensor pred = forward(net, input, &cache);
      Tensor grad;
      const double loss = mse_loss(pred, target, &grad);
      if (!std::isfinite(loss)) {
        ok = false;
        break;
      }
      loss_sum += loss * static_cast<double>(end - begin);
      loss_count += end - begin;

      NetworkGrads grads = backward(net, cache, grad);
      try {
        sgd_step(net, grads, lr, tc.weight_decay);
      } catch (const NumericError&) {
        ok = false;
        break;
      }
    }

    if (!ok) {
      net = last_good;
      result.diverged = true;
      break;
    }
    result.epoch_losses.push_back(loss_sum / static_cast<double>(loss_count));
    result.completed_epochs = epoch + 1;
    last_good = net;
  }
  return result;
}

}  // namespace usdbf::nn
