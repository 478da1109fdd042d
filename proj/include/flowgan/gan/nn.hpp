#pragma once

// Minimal layer library for the encoder-decoder generator and the discriminator.
//
// Activations use a channel-major layout (C, N, H, W): every channel's values for
// the whole batch are contiguous, so a convolution is a single GEMM over the batch
// and batch normalization reduces over one contiguous run. Dense activations are
// (F, N, 1, 1).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace flowgan::gan {

template <typename T>
struct FeatureMap {
    int channels = 0;
    int batch = 0;
    int height = 1;
    int width = 1;
    std::vector<T> data;

    FeatureMap() = default;
    FeatureMap(int c, int n, int h, int w)
        : channels(c), batch(n), height(h), width(w),
          data(static_cast<std::size_t>(c) * n * h * w, T(0)) {}

    std::size_t size() const { return data.size(); }
    std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
    bool same_shape(const FeatureMap& o) const {
        return channels == o.channels && batch == o.batch && height == o.height && width == o.width;
    }
    T& at(int c, int n, int y, int x) {
        return data[((static_cast<std::size_t>(c) * batch + n) * height + y) * width + x];
    }
    const T& at(int c, int n, int y, int x) const {
        return data[((static_cast<std::size_t>(c) * batch + n) * height + y) * width + x];
    }
};

enum class Mode { train, eval };

template <typename T>
struct Param {
    std::string name;
    std::vector<std::uint64_t> shape;
    std::vector<T> value;
    std::vector<T> grad;
    bool trainable = true;  // running statistics are stored as non-trainable params

    Param(std::string n, std::vector<std::uint64_t> s, T fill, bool train = true);
};

template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual FeatureMap<T> forward(const FeatureMap<T>& x, Mode mode) = 0;
    // Uses state cached by the most recent forward(). Parameter gradients are
    // accumulated (+=) unless param grads are disabled on the owning network.
    virtual FeatureMap<T> backward(const FeatureMap<T>& dy, bool param_grads) = 0;
    virtual std::vector<Param<T>*> params() { return {}; }
    virtual void init(std::mt19937_64&) {}
};

template <typename T>
class Conv2d final : public Layer<T> {
public:
    Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad, bool bias);
    FeatureMap<T> forward(const FeatureMap<T>& x, Mode mode) override;
    FeatureMap<T> backward(const FeatureMap<T>& dy, bool param_grads) override;
    std::vector<Param<T>*> params() override;
    void init(std::mt19937_64& rng) override;

private:
    int in_, out_, k_, s_, p_;
    bool has_bias_;
    Param<T> weight_;  // out x in x k x k
    Param<T> bias_;
    std::vector<T> col_;
    int in_h_ = 0, in_w_ = 0, batch_ = 0, out_h_ = 0, out_w_ = 0;
};

template <typename T>
class ConvTranspose2d final : public Layer<T> {
public:
    ConvTranspose2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad, bool bias);
    FeatureMap<T> forward(const FeatureMap<T>& x, Mode mode) override;
    FeatureMap<T> backward(const FeatureMap<T>& dy, bool param_grads) override;
    std::vector<Param<T>*> params() override;
    void init(std::mt19937_64& rng) override;

private:
    int in_, out_, k_, s_, p_;
    bool has_bias_;
    Param<T> weight_;  // in x out x k x k
    Param<T> bias_;
    FeatureMap<T> x_;
};

template <typename T>
class Dense final : public Layer<T> {
public:
    Dense(std::string name, int in_features, int out_features, bool bias);
    FeatureMap<T> forward(const FeatureMap<T>& x, Mode mode) override;
    FeatureMap<T> backward(const FeatureMap<T>& dy, bool param_grads) override;
    std::vector<Param<T>*> params() override;
    void init(std::mt19937_64& rng) override;

private:
    int in_, out_;
    bool has_bias_;
    Param<T> weight_;  // out x in
    Param<T> bias_;
    FeatureMap<T> x_;
};

template <typename T>
class BatchNorm final : public Layer<T> {
public:
    BatchNorm(std::string name, int channels, double momentum = 0.1, double eps = 1e-5);
    FeatureMap<T> forward(const FeatureMap<T>& x, Mode mode) override;
    FeatureMap<T> backward(const FeatureMap<T>& dy, bool param_grads) override;
    std::vector<Param<T>*> params() override;

private:
    int channels_;
    double momentum_, eps_;
    Param<T> gamma_, beta_, running_mean_, running_var_;
    std::vector<T> xhat_;
    std::vector<T> inv_std_;
    Mode last_mode_ = Mode::train;
};

template <typename T>
class LeakyRelu final : public Layer<T> {
public:
    explicit LeakyRelu(T slope) : slope_(slope) {}
    FeatureMap<T> forward(const FeatureMap<T>& x, Mode mode) override;
    FeatureMap<T> backward(const FeatureMap<T>& dy, bool param_grads) override;

private:
    T slope_;
    FeatureMap<T> x_;
};

template <typename T>
class Tanh final : public Layer<T> {
public:
    FeatureMap<T> forward(const FeatureMap<T>& x, Mode mode) override;
    FeatureMap<T> backward(const FeatureMap<T>& dy, bool param_grads) override;

private:
    FeatureMap<T> y_;
};

// (C, N, H, W) <-> (C*H*W, N, 1, 1), feature index c*H*W + y*W + x.
template <typename T>
class Flatten final : public Layer<T> {
public:
    FeatureMap<T> forward(const FeatureMap<T>& x, Mode mode) override;
    FeatureMap<T> backward(const FeatureMap<T>& dy, bool param_grads) override;

private:
    int c_ = 0, h_ = 0, w_ = 0;
};

template <typename T>
class Unflatten final : public Layer<T> {
public:
    Unflatten(int c, int h, int w) : c_(c), h_(h), w_(w) {}
    FeatureMap<T> forward(const FeatureMap<T>& x, Mode mode) override;
    FeatureMap<T> backward(const FeatureMap<T>& dy, bool param_grads) override;

private:
    int c_, h_, w_;
};

template <typename T>
class Sequential {
public:
    Sequential() = default;
    Sequential(Sequential&&) noexcept = default;
    Sequential& operator=(Sequential&&) noexcept = default;

    template <class L, class... Args>
    L& add(Args&&... args) {
        auto p = std::make_unique<L>(std::forward<Args>(args)...);
        L& ref = *p;
        layers_.push_back(std::move(p));
        return ref;
    }

    FeatureMap<T> forward(const FeatureMap<T>& x, Mode mode);
    FeatureMap<T> backward(const FeatureMap<T>& dy, bool param_grads = true);
    std::vector<Param<T>*> params();
    void init(std::mt19937_64& rng);
    void zero_grad();
    std::size_t depth() const { return layers_.size(); }

private:
    std::vector<std::unique_ptr<Layer<T>>> layers_;
};

} // namespace flowgan::gan
