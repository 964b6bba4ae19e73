#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hsfl/assignment.hpp"
#include "hsfl/random.hpp"

namespace hsfl {

// Dense feed-forward architecture, tanh hidden activations, softmax output.
struct ToyModelArch {
    int input = 20;
    std::vector<int> hidden = {32, 16};
    int classes = 4;

    std::vector<int> widths() const
    {
        std::vector<int> w;
        w.push_back(input);
        for (const int h : hidden) w.push_back(h);
        w.push_back(classes);
        return w;
    }

    int param_count() const
    {
        const auto w = widths();
        int n = 0;
        for (std::size_t i = 0; i + 1 < w.size(); ++i)
            n += w[i] * w[i + 1] + w[i + 1];
        return n;
    }
};

// Flattened parameter vector, layer-major: W (out x in, row-major) then b.
struct ToyModel {
    ToyModelArch arch;
    std::vector<double> params;
};

struct DeviceData {
    int dim = 0;
    std::vector<double> inputs;  // count * dim, row-major
    std::vector<int> labels;

    int count() const { return static_cast<int>(labels.size()); }
};

inline ToyModel init_toy_model(const ToyModelArch& arch, RngStream& rng)
{
    ToyModel m;
    m.arch = arch;
    m.params.resize(static_cast<std::size_t>(arch.param_count()));
    const auto w = arch.widths();
    std::size_t p = 0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        const double a = std::sqrt(6.0 / static_cast<double>(w[i] + w[i + 1]));
        for (int j = 0; j < w[i] * w[i + 1]; ++j)
            m.params[p++] = a * (2.0 * rng.uniform01() - 1.0);
        for (int j = 0; j < w[i + 1]; ++j)
            m.params[p++] = 0.0;
    }
    return m;
}

namespace detail {

// Forward pass plus optional backward accumulation for one sample.
// Returns the cross-entropy loss; grad (same layout as params) is
// accumulated when non-null.
inline double sample_loss_grad(const ToyModelArch& arch, const std::vector<double>& params,
                               const double* x, int label, std::vector<double>* grad)
{
    const auto w = arch.widths();
    const std::size_t layers = w.size() - 1;

    std::vector<std::vector<double>> act(layers + 1);
    act[0].assign(x, x + w[0]);
    std::size_t p = 0;
    std::vector<std::size_t> offsets(layers);
    for (std::size_t li = 0; li < layers; ++li) {
        offsets[li] = p;
        const int in = w[li], out = w[li + 1];
        act[li + 1].resize(static_cast<std::size_t>(out));
        for (int o = 0; o < out; ++o) {
            double z = params[p + static_cast<std::size_t>(in * out + o)];  // bias
            const double* row = &params[p + static_cast<std::size_t>(o * in)];
            const double* ai = act[li].data();
            for (int i = 0; i < in; ++i) z += row[i] * ai[i];
            act[li + 1][static_cast<std::size_t>(o)] =
                (li + 1 == layers) ? z : std::tanh(z);
        }
        p += static_cast<std::size_t>(in * out + out);
    }

    // softmax cross-entropy on the logits
    auto& logits = act[layers];
    double zmax = logits[0];
    for (const double z : logits) zmax = std::max(zmax, z);
    double denom = 0.0;
    for (const double z : logits) denom += std::exp(z - zmax);
    const double loss = -(logits[static_cast<std::size_t>(label)] - zmax - std::log(denom));

    if (!grad) return loss;

    std::vector<double> delta(logits.size());
    for (std::size_t o = 0; o < logits.size(); ++o) {
        const double soft = std::exp(logits[o] - zmax) / denom;
        delta[o] = soft - (static_cast<int>(o) == label ? 1.0 : 0.0);
    }
    for (std::size_t li = layers; li-- > 0;) {
        const int in = w[li], out = w[li + 1];
        const std::size_t off = offsets[li];
        std::vector<double> prev(static_cast<std::size_t>(in), 0.0);
        for (int o = 0; o < out; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            double* grow = &(*grad)[off + static_cast<std::size_t>(o * in)];
            const double* row = &params[off + static_cast<std::size_t>(o * in)];
            const double* ai = act[li].data();
            for (int i = 0; i < in; ++i) {
                grow[i] += d * ai[i];
                prev[static_cast<std::size_t>(i)] += d * row[i];
            }
            (*grad)[off + static_cast<std::size_t>(in * out + o)] += d;
        }
        if (li > 0) {
            // through the tanh of the previous layer
            for (int i = 0; i < in; ++i) {
                const double a = act[li][static_cast<std::size_t>(i)];
                prev[static_cast<std::size_t>(i)] *= (1.0 - a * a);
            }
        }
        delta = std::move(prev);
    }
    return loss;
}

}  // namespace detail

// Mean gradient of the softmax cross-entropy over the given batch.
inline std::vector<double> local_gradient(const ToyModel& model, const DeviceData& data,
                                          const std::vector<int>& batch_indices)
{
    if (batch_indices.empty())
        throw std::invalid_argument("local_gradient: empty batch");
    std::vector<double> grad(model.params.size(), 0.0);
    for (const int idx : batch_indices) {
        if (idx < 0 || idx >= data.count())
            throw std::invalid_argument("local_gradient: batch index out of range");
        detail::sample_loss_grad(model.arch, model.params,
                                 &data.inputs[static_cast<std::size_t>(idx) *
                                              static_cast<std::size_t>(data.dim)],
                                 data.labels[static_cast<std::size_t>(idx)], &grad);
    }
    const double inv = 1.0 / static_cast<double>(batch_indices.size());
    for (auto& g : grad) g *= inv;
    return grad;
}

inline double dataset_loss(const ToyModel& model, const DeviceData& data)
{
    if (data.count() == 0) throw std::invalid_argument("dataset_loss: empty dataset");
    double total = 0.0;
    for (int i = 0; i < data.count(); ++i)
        total += detail::sample_loss_grad(model.arch, model.params,
                                          &data.inputs[static_cast<std::size_t>(i) *
                                                       static_cast<std::size_t>(data.dim)],
                                          data.labels[static_cast<std::size_t>(i)], nullptr);
    return total / static_cast<double>(data.count());
}

namespace detail {

inline std::vector<double> sgd_step(const ToyModel& model, const DeviceData& data,
                                    const std::vector<int>& batch, double eta)
{
    const auto grad = local_gradient(model, data, batch);
    std::vector<double> next = model.params;
    for (std::size_t i = 0; i < next.size(); ++i) next[i] -= eta * grad[i];
    return next;
}

}  // namespace detail

// Parallel FL updates: every listed device takes one SGD step from the
// shared global model.
inline std::vector<std::vector<double>> fl_round_update(
    const ToyModel& global, const std::vector<DeviceData>& devices,
    const std::vector<int>& fl_ids, const std::vector<std::vector<int>>& batch_indices,
    double eta)
{
    std::vector<std::vector<double>> out;
    out.reserve(fl_ids.size());
    for (std::size_t j = 0; j < fl_ids.size(); ++j) {
        ToyModel m{global.arch, global.params};
        out.push_back(detail::sgd_step(m, devices[static_cast<std::size_t>(fl_ids[j])],
                                       batch_indices[j], eta));
    }
    return out;
}

// Sequential SL chain: each device starts from its predecessor's update.
// Returns all intermediate models in chain order.
inline std::vector<std::vector<double>> sl_chain_update(
    const ToyModel& global, const std::vector<DeviceData>& devices,
    const std::vector<int>& sl_order, const std::vector<std::vector<int>>& batch_indices,
    double eta)
{
    std::vector<std::vector<double>> out;
    out.reserve(sl_order.size());
    ToyModel running{global.arch, global.params};
    for (std::size_t j = 0; j < sl_order.size(); ++j) {
        running.params = detail::sgd_step(running, devices[static_cast<std::size_t>(sl_order[j])],
                                          batch_indices[j], eta);
        out.push_back(running.params);
    }
    return out;
}

// Unweighted mean of the per-device updates, summed in device-id order.
inline std::vector<double> aggregate(const std::vector<std::vector<double>>& models)
{
    if (models.empty()) throw std::invalid_argument("aggregate: no models");
    const std::size_t dim = models.front().size();
    std::vector<double> mean(dim, 0.0);
    for (const auto& m : models) {
        if (m.size() != dim) throw std::invalid_argument("aggregate: dimension mismatch");
        for (std::size_t i = 0; i < dim; ++i) mean[i] += m[i];
    }
    const double inv = 1.0 / static_cast<double>(models.size());
    for (auto& v : mean) v *= inv;
    return mean;
}

// Synthetic classification set: balanced Gaussian clusters with unit
// variance, class means at radius 2.5.
inline DeviceData make_gaussian_mixture(int samples, int classes, int dim, RngStream& rng)
{
    if (samples < classes || classes < 2 || dim < 1)
        throw std::invalid_argument("make_gaussian_mixture: bad shape");
    std::vector<std::vector<double>> means(static_cast<std::size_t>(classes));
    for (auto& m : means) {
        m.resize(static_cast<std::size_t>(dim));
        double norm = 0.0;
        for (auto& v : m) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : m) v = 2.5 * v / norm;
    }
    DeviceData data;
    data.dim = dim;
    data.inputs.resize(static_cast<std::size_t>(samples) * static_cast<std::size_t>(dim));
    data.labels.resize(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const int c = i % classes;
        data.labels[static_cast<std::size_t>(i)] = c;
        for (int d = 0; d < dim; ++d)
            data.inputs[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim) +
                        static_cast<std::size_t>(d)] =
                means[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] + rng.normal();
    }
    return data;
}

inline std::pair<DeviceData, DeviceData> split_holdout(const DeviceData& data,
                                                       double holdout_fraction)
{
    const int n = data.count();
    const int hold = std::max(1, static_cast<int>(std::floor(n * holdout_fraction)));
    const int train = n - hold;
    if (train < 1) throw std::invalid_argument("split_holdout: nothing left to train on");
    const auto slice = [&](int from, int count) {
        DeviceData d;
        d.dim = data.dim;
        d.inputs.assign(data.inputs.begin() + static_cast<std::ptrdiff_t>(from) * data.dim,
                        data.inputs.begin() +
                            static_cast<std::ptrdiff_t>(from + count) * data.dim);
        d.labels.assign(data.labels.begin() + from, data.labels.begin() + from + count);
        return d;
    };
    return {slice(0, train), slice(train, hold)};
}

// Dirichlet non-IID partition over devices. The heterogeneity knob phi
// follows the convention that larger phi means more skew, so the Dirichlet
// concentration is 1/phi (phi -> 0 recovers uniform shares). Redraws until
// every device holds at least one sample.
inline std::vector<DeviceData> dirichlet_partition(const DeviceData& full, int device_count,
                                                   double phi, RngStream& rng)
{
    if (!(phi > 0.0)) throw std::invalid_argument("dirichlet_partition: phi must be positive");
    if (device_count < 1) throw std::invalid_argument("dirichlet_partition: no devices");
    const double alpha = 1.0 / phi;

    int classes = 0;
    for (const int l : full.labels) classes = std::max(classes, l + 1);
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(classes));
    for (int i = 0; i < full.count(); ++i)
        by_class[static_cast<std::size_t>(full.labels[static_cast<std::size_t>(i)])].push_back(i);

    constexpr int max_attempts = 200;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<std::vector<int>> assigned(static_cast<std::size_t>(device_count));
        for (auto& cls : by_class) {
            const int n = static_cast<int>(cls.size());
            const auto w = rng.dirichlet(alpha, device_count);
            // largest-remainder quotas
            std::vector<int> quota(static_cast<std::size_t>(device_count));
            std::vector<std::pair<double, int>> rem;
            int used = 0;
            for (int k = 0; k < device_count; ++k) {
                const double exact = w[static_cast<std::size_t>(k)] * n;
                quota[static_cast<std::size_t>(k)] = static_cast<int>(std::floor(exact));
                used += quota[static_cast<std::size_t>(k)];
                rem.push_back({exact - std::floor(exact), k});
            }
            std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
                return a.first > b.first || (a.first == b.first && a.second < b.second);
            });
            for (int r = 0; r < n - used; ++r)
                quota[static_cast<std::size_t>(rem[static_cast<std::size_t>(r)].second)] += 1;

            const auto order = rng.permutation(n);
            int pos = 0;
            for (int k = 0; k < device_count; ++k)
                for (int j = 0; j < quota[static_cast<std::size_t>(k)]; ++j)
                    assigned[static_cast<std::size_t>(k)].push_back(
                        cls[static_cast<std::size_t>(order[static_cast<std::size_t>(pos++)])]);
        }
        bool ok = true;
        for (const auto& a : assigned)
            if (a.empty()) { ok = false; break; }
        if (!ok) continue;

        std::vector<DeviceData> out(static_cast<std::size_t>(device_count));
        for (int k = 0; k < device_count; ++k) {
            auto& d = out[static_cast<std::size_t>(k)];
            d.dim = full.dim;
            for (const int idx : assigned[static_cast<std::size_t>(k)]) {
                for (int c = 0; c < full.dim; ++c)
                    d.inputs.push_back(full.inputs[static_cast<std::size_t>(idx) * full.dim +
                                                   static_cast<std::size_t>(c)]);
                d.labels.push_back(full.labels[static_cast<std::size_t>(idx)]);
            }
        }
        return out;
    }
    throw std::runtime_error("dirichlet_partition: could not give every device a sample; "
                             "phi too extreme for this dataset size");
}

// One HSFL round of actual training. Batch indices come from per-device
// substreams of (seed, round), so batch content is independent of the mode
// split and the SL order.
struct RoundPlan {
    std::vector<Mode> modes;
    std::vector<int> batch_sizes;
    std::vector<int> sl_order;  // device ids, server-randomized order
};

inline std::vector<int> sample_batch(int dataset_size, int batch, RngStream& rng)
{
    if (batch < 1 || batch > dataset_size)
        throw std::invalid_argument("sample_batch: batch outside [1, D]");
    // partial Fisher-Yates, without replacement
    std::vector<int> pool(static_cast<std::size_t>(dataset_size));
    for (int i = 0; i < dataset_size; ++i) pool[static_cast<std::size_t>(i)] = i;
    std::vector<int> out(static_cast<std::size_t>(batch));
    for (int i = 0; i < batch; ++i) {
        const int j = i + rng.uniform_int(dataset_size - i);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        out[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
    }
    return out;
}

constexpr std::uint64_t kBatchStreamTag = 0x42;

inline void hsfl_training_round(ToyModel& global, const std::vector<DeviceData>& devices,
                                const RoundPlan& plan, double eta, std::uint64_t seed, int round)
{
    const int n = static_cast<int>(devices.size());
    std::vector<std::vector<int>> batches(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        RngStream bs(derive_seed(seed, static_cast<std::uint64_t>(round), kBatchStreamTag,
                                 static_cast<std::uint64_t>(k)));
        batches[static_cast<std::size_t>(k)] =
            sample_batch(devices[static_cast<std::size_t>(k)].count(),
                         plan.batch_sizes[static_cast<std::size_t>(k)], bs);
    }

    const auto fl_ids = devices_in_mode(plan.modes, Mode::FL);
    std::vector<std::vector<int>> fl_batches, sl_batches;
    for (const int k : fl_ids) fl_batches.push_back(batches[static_cast<std::size_t>(k)]);
    for (const int k : plan.sl_order) sl_batches.push_back(batches[static_cast<std::size_t>(k)]);

    const auto fl_models = fl_round_update(global, devices, fl_ids, fl_batches, eta);
    const auto sl_models = sl_chain_update(global, devices, plan.sl_order, sl_batches, eta);

    // collect in device-id order so the aggregation sum order is fixed
    std::vector<std::vector<double>> by_device(static_cast<std::size_t>(n));
    for (std::size_t j = 0; j < fl_ids.size(); ++j)
        by_device[static_cast<std::size_t>(fl_ids[j])] = fl_models[j];
    for (std::size_t j = 0; j < plan.sl_order.size(); ++j)
        by_device[static_cast<std::size_t>(plan.sl_order[j])] = sl_models[j];
    global.params = aggregate(by_device);
}

// Dataset and model knobs of the toy training stack.
struct DatasetConfig {
    int samples = 2000;
    int classes = 4;
    int dim = 20;
    double phi = 1.0;              // non-IID level; larger = more skew
    double holdout_fraction = 0.2;
    std::vector<int> hidden = {32, 16};
    double eta = 0.05;
};

// Data, holdout and initial model shared by every scheme of a comparison
// run (common random numbers).
struct TrainingBundle {
    ToyModelArch arch;
    double eta = 0.05;
    std::vector<DeviceData> devices;
    DeviceData holdout;
    ToyModel initial;

    std::vector<double> dataset_sizes() const
    {
        std::vector<double> d;
        d.reserve(devices.size());
        for (const auto& dev : devices) d.push_back(static_cast<double>(dev.count()));
        return d;
    }
};

constexpr std::uint64_t kDataStreamTag = 0x44;
constexpr std::uint64_t kPartitionStreamTag = 0x50;
constexpr std::uint64_t kInitStreamTag = 0x49;

inline TrainingBundle make_training_bundle(const DatasetConfig& cfg, int device_count,
                                           std::uint64_t seed)
{
    TrainingBundle b;
    b.arch.input = cfg.dim;
    b.arch.hidden = cfg.hidden;
    b.arch.classes = cfg.classes;
    b.eta = cfg.eta;

    RngStream data_rng(derive_seed(seed, kDataStreamTag));
    const DeviceData full = make_gaussian_mixture(cfg.samples, cfg.classes, cfg.dim, data_rng);
    const auto [train, holdout] = split_holdout(full, cfg.holdout_fraction);
    b.holdout = holdout;

    RngStream part_rng(derive_seed(seed, kPartitionStreamTag));
    b.devices = dirichlet_partition(train, device_count, cfg.phi, part_rng);

    RngStream init_rng(derive_seed(seed, kInitStreamTag));
    b.initial = init_toy_model(b.arch, init_rng);
    return b;
}

struct TrainingOutcome {
    std::vector<double> loss_curve;
    int rounds_to_target = -1;  // first 1-based round with loss <= target
};

inline TrainingOutcome run_hsfl_training(const std::vector<DeviceData>& devices,
                                         const DeviceData& holdout, const ToyModel& initial,
                                         const std::function<RoundPlan(int)>& plan_for_round,
                                         int rounds, double eta, double target_loss,
                                         std::uint64_t seed, bool stop_at_target = false)
{
    TrainingOutcome out;
    ToyModel global = initial;
    for (int t = 1; t <= rounds; ++t) {
        const RoundPlan plan = plan_for_round(t);
        hsfl_training_round(global, devices, plan, eta, seed, t);
        const double loss = dataset_loss(global, holdout);
        if (!std::isfinite(loss))
            throw std::runtime_error("run_hsfl_training: divergence at round " +
                                     std::to_string(t));
        out.loss_curve.push_back(loss);
        if (out.rounds_to_target < 0 && loss <= target_loss) {
            out.rounds_to_target = t;
            if (stop_at_target) break;
        }
    }
    return out;
}

}  // namespace hsfl
