#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsfl {

// Per-layer cost profile of the trained network. Payload sizes are per
// sample; flops cover forward plus backward propagation of one sample.
struct LayerProfile {
    double param_bits = 0.0;        // bits to transmit this layer's parameters
    double flops_per_sample = 0.0;  // forward + backward FLOPs, one sample
    double fwd_payload_bits = 0.0;  // activations at this layer plus label
    double bwd_payload_bits = 0.0;  // gradients w.r.t. the activations
};

// Layer-wise model profile with prefix sums for O(1) cut-point queries.
// Cut indices are 1-based: a cut at l keeps layers 1..l on the device and
// layers l+1..L on the server.
class ModelProfile {
  public:
    static ModelProfile from_layers(std::vector<LayerProfile> layers)
    {
        if (layers.size() < 2)
            throw std::invalid_argument("ModelProfile: at least 2 layers required");
        ModelProfile p;
        p.layers_ = std::move(layers);
        p.bits_prefix_.resize(p.layers_.size() + 1, 0.0);
        p.flops_prefix_.resize(p.layers_.size() + 1, 0.0);
        for (std::size_t i = 0; i < p.layers_.size(); ++i) {
            const auto& l = p.layers_[i];
            if (l.param_bits < 0 || l.flops_per_sample < 0 ||
                l.fwd_payload_bits < 0 || l.bwd_payload_bits < 0)
                throw std::invalid_argument("ModelProfile: negative layer field at index " +
                                            std::to_string(i));
            p.bits_prefix_[i + 1] = p.bits_prefix_[i] + l.param_bits;
            p.flops_prefix_[i + 1] = p.flops_prefix_[i] + l.flops_per_sample;
        }
        return p;
    }

    int layer_count() const { return static_cast<int>(layers_.size()); }

    const LayerProfile& layer(int index_1based) const
    {
        check_cut(index_1based);
        return layers_[static_cast<std::size_t>(index_1based - 1)];
    }

    const std::vector<LayerProfile>& layers() const { return layers_; }

    double total_bits() const { return bits_prefix_.back(); }
    double total_flops_per_sample() const { return flops_prefix_.back(); }

    // bits of the local model (layers 1..cut)
    double local_model_bits(int cut) const
    {
        check_cut(cut);
        return bits_prefix_[static_cast<std::size_t>(cut)];
    }

    double local_flops(int cut) const
    {
        check_cut(cut);
        return flops_prefix_[static_cast<std::size_t>(cut)];
    }

    double edge_flops(int cut) const
    {
        check_cut(cut);
        return flops_prefix_.back() - flops_prefix_[static_cast<std::size_t>(cut)];
    }

    double fwd_payload_bits(int cut) const { return layer(cut).fwd_payload_bits; }
    double bwd_payload_bits(int cut) const { return layer(cut).bwd_payload_bits; }

  private:
    void check_cut(int cut) const
    {
        if (cut < 1 || cut > layer_count())
            throw std::invalid_argument("ModelProfile: cut index " + std::to_string(cut) +
                                        " outside [1, " + std::to_string(layer_count()) + "]");
    }

    std::vector<LayerProfile> layers_;
    std::vector<double> bits_prefix_;
    std::vector<double> flops_prefix_;
};

namespace detail {

inline LayerProfile conv_layer(int c_in, int c_out, int kernel,
                               int h_in, int w_in, double label_bits)
{
    // stride 1, no padding, followed by 2x2 pooling; the payload at the cut
    // is the post-pooling feature map.
    const int h_out = h_in - kernel + 1;
    const int w_out = w_in - kernel + 1;
    const int h_pool = h_out / 2;
    const int w_pool = w_out / 2;
    const double params = static_cast<double>(c_in) * c_out * kernel * kernel + c_out;
    const double fwd = 2.0 * kernel * kernel * c_in * c_out * h_out * w_out;
    const double features = static_cast<double>(c_out) * h_pool * w_pool;
    LayerProfile l;
    l.param_bits = 32.0 * params;
    l.flops_per_sample = 3.0 * fwd;  // backward costs twice the forward pass
    l.fwd_payload_bits = 32.0 * features + label_bits;
    l.bwd_payload_bits = 32.0 * features;
    return l;
}

inline LayerProfile dense_layer(int in, int out, double label_bits)
{
    const double params = static_cast<double>(in) * out + out;
    const double fwd = 2.0 * static_cast<double>(in) * out;
    LayerProfile l;
    l.param_bits = 32.0 * params;
    l.flops_per_sample = 3.0 * fwd;
    l.fwd_payload_bits = 32.0 * out + label_bits;
    l.bwd_payload_bits = 32.0 * out;
    return l;
}

}  // namespace detail

// Six-layer CNN profile used by the wireless experiments: an input layer
// (zero parameters, zero FLOPs), two 5x5 convolutions (3->6, 6->16, each
// followed by 2x2 pooling) and three dense layers (400->120->84->10), for
// 32x32x3 inputs. Parameters and activations are 32-bit; one 32-bit label
// rides along with the forward payload.
inline ModelProfile lenet5_profile()
{
    constexpr double label_bits = 32.0;
    std::vector<LayerProfile> layers;
    LayerProfile input;
    input.param_bits = 0.0;
    input.flops_per_sample = 0.0;
    input.fwd_payload_bits = 32.0 * 32 * 32 * 3 + label_bits;
    input.bwd_payload_bits = 32.0 * 32 * 32 * 3;
    layers.push_back(input);
    layers.push_back(detail::conv_layer(3, 6, 5, 32, 32, label_bits));   // -> 6x14x14
    layers.push_back(detail::conv_layer(6, 16, 5, 14, 14, label_bits));  // -> 16x5x5
    layers.push_back(detail::dense_layer(400, 120, label_bits));
    layers.push_back(detail::dense_layer(120, 84, label_bits));
    layers.push_back(detail::dense_layer(84, 10, label_bits));
    return ModelProfile::from_layers(std::move(layers));
}

}  // namespace hsfl
