#include "flowgan/gan/nn.hpp"

#include "flowgan/error.hpp"
#include "flowgan/simd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace flowgan::gan {

using simd::Trans;

template <typename T>
Param<T>::Param(std::string n, std::vector<std::uint64_t> s, T fill, bool train)
    : name(std::move(n)), shape(std::move(s)), trainable(train) {
    std::size_t count = 1;
    for (auto d : shape) count *= d;
    value.assign(count, fill);
    grad.assign(count, T(0));
}

namespace {

template <typename T>
void normal_init(Param<T>& p, std::mt19937_64& rng, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& w : p.value) w = static_cast<T>(dist(rng));
}

// Image side is (C, N, H, W); column side is (C*k*k) x (N*OH*OW).
template <typename T>
void im2col(const T* img, int c, int n, int h, int w, int k, int s, int p, int oh, int ow, T* col) {
    const std::size_t cols = static_cast<std::size_t>(n) * oh * ow;
    for (int ci = 0; ci < c; ++ci) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                T* dst = col + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * cols;
                for (int ni = 0; ni < n; ++ni) {
                    const T* src = img + (static_cast<std::size_t>(ci) * n + ni) * h * w;
                    for (int oy = 0; oy < oh; ++oy) {
                        T* d = dst + (static_cast<std::size_t>(ni) * oh + oy) * ow;
                        const int iy = oy * s - p + ky;
                        if (iy < 0 || iy >= h) {
                            std::fill(d, d + ow, T(0));
                            continue;
                        }
                        const T* srow = src + static_cast<std::size_t>(iy) * w;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * s - p + kx;
                            d[ox] = (ix >= 0 && ix < w) ? srow[ix] : T(0);
                        }
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatters-adds columns back into a zeroed image.
template <typename T>
void col2im(const T* col, int c, int n, int h, int w, int k, int s, int p, int oh, int ow, T* img) {
    const std::size_t cols = static_cast<std::size_t>(n) * oh * ow;
    std::fill(img, img + static_cast<std::size_t>(c) * n * h * w, T(0));
    for (int ci = 0; ci < c; ++ci) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const T* src = col + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * cols;
                for (int ni = 0; ni < n; ++ni) {
                    T* dst = img + (static_cast<std::size_t>(ci) * n + ni) * h * w;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * s - p + ky;
                        if (iy < 0 || iy >= h) continue;
                        const T* srow = src + (static_cast<std::size_t>(ni) * oh + oy) * ow;
                        T* drow = dst + static_cast<std::size_t>(iy) * w;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * s - p + kx;
                            if (ix >= 0 && ix < w) drow[ix] += srow[ox];
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void add_channel_bias(FeatureMap<T>& y, const std::vector<T>& bias) {
    const std::size_t block = static_cast<std::size_t>(y.batch) * y.plane();
    for (int c = 0; c < y.channels; ++c) {
        T* p = y.data.data() + c * block;
        for (std::size_t i = 0; i < block; ++i) p[i] += bias[c];
    }
}

template <typename T>
void accumulate_channel_sums(const FeatureMap<T>& dy, std::vector<T>& grad) {
    const std::size_t block = static_cast<std::size_t>(dy.batch) * dy.plane();
    for (int c = 0; c < dy.channels; ++c) {
        const T* p = dy.data.data() + c * block;
        double s = 0.0;
        for (std::size_t i = 0; i < block; ++i) s += p[i];
        grad[c] += static_cast<T>(s);
    }
}

constexpr double kInitStd = 0.02;

} // namespace

// --- Conv2d -----------------------------------------------------------------

template <typename T>
Conv2d<T>::Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad, bool bias)
    : in_(in_ch), out_(out_ch), k_(kernel), s_(stride), p_(pad), has_bias_(bias),
      weight_(name + ".weight",
              {std::uint64_t(out_ch), std::uint64_t(in_ch), std::uint64_t(kernel), std::uint64_t(kernel)}, T(0)),
      bias_(name + ".bias", {std::uint64_t(bias ? out_ch : 0)}, T(0)) {}

template <typename T>
FeatureMap<T> Conv2d<T>::forward(const FeatureMap<T>& x, Mode) {
    if (x.channels != in_) throw ShapeError(weight_.name + ": expected " + std::to_string(in_) + " channels");
    in_h_ = x.height;
    in_w_ = x.width;
    batch_ = x.batch;
    out_h_ = (in_h_ + 2 * p_ - k_) / s_ + 1;
    out_w_ = (in_w_ + 2 * p_ - k_) / s_ + 1;
    if (out_h_ <= 0 || out_w_ <= 0) throw ShapeError(weight_.name + ": input too small");
    const std::size_t rows = static_cast<std::size_t>(in_) * k_ * k_;
    const std::size_t cols = static_cast<std::size_t>(batch_) * out_h_ * out_w_;
    col_.resize(rows * cols);
    im2col(x.data.data(), in_, batch_, in_h_, in_w_, k_, s_, p_, out_h_, out_w_, col_.data());
    FeatureMap<T> y(out_, batch_, out_h_, out_w_);
    simd::gemm(Trans::no, Trans::no, out_, cols, rows, T(1), weight_.value.data(), rows, col_.data(),
               cols, T(0), y.data.data(), cols);
    if (has_bias_) add_channel_bias(y, bias_.value);
    return y;
}

template <typename T>
FeatureMap<T> Conv2d<T>::backward(const FeatureMap<T>& dy, bool param_grads) {
    const std::size_t rows = static_cast<std::size_t>(in_) * k_ * k_;
    const std::size_t cols = static_cast<std::size_t>(batch_) * out_h_ * out_w_;
    if (dy.size() != out_ * cols) throw ShapeError(weight_.name + ": gradient shape mismatch");
    if (param_grads) {
        simd::gemm(Trans::no, Trans::yes, out_, rows, cols, T(1), dy.data.data(), cols, col_.data(), cols,
                   T(1), weight_.grad.data(), rows);
        if (has_bias_) accumulate_channel_sums(dy, bias_.grad);
    }
    std::vector<T> dcol(rows * cols);
    simd::gemm(Trans::yes, Trans::no, rows, cols, out_, T(1), weight_.value.data(), rows, dy.data.data(),
               cols, T(0), dcol.data(), cols);
    FeatureMap<T> dx(in_, batch_, in_h_, in_w_);
    col2im(dcol.data(), in_, batch_, in_h_, in_w_, k_, s_, p_, out_h_, out_w_, dx.data.data());
    return dx;
}

template <typename T>
std::vector<Param<T>*> Conv2d<T>::params() {
    if (has_bias_) return {&weight_, &bias_};
    return {&weight_};
}

template <typename T>
void Conv2d<T>::init(std::mt19937_64& rng) {
    normal_init(weight_, rng, kInitStd);
    std::fill(bias_.value.begin(), bias_.value.end(), T(0));
}

// --- ConvTranspose2d --------------------------------------------------------

template <typename T>
ConvTranspose2d<T>::ConvTranspose2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad,
                                    bool bias)
    : in_(in_ch), out_(out_ch), k_(kernel), s_(stride), p_(pad), has_bias_(bias),
      weight_(name + ".weight",
              {std::uint64_t(in_ch), std::uint64_t(out_ch), std::uint64_t(kernel), std::uint64_t(kernel)}, T(0)),
      bias_(name + ".bias", {std::uint64_t(bias ? out_ch : 0)}, T(0)) {}

template <typename T>
FeatureMap<T> ConvTranspose2d<T>::forward(const FeatureMap<T>& x, Mode) {
    if (x.channels != in_) throw ShapeError(weight_.name + ": expected " + std::to_string(in_) + " channels");
    x_ = x;
    const int oh = (x.height - 1) * s_ - 2 * p_ + k_;
    const int ow = (x.width - 1) * s_ - 2 * p_ + k_;
    const std::size_t rows = static_cast<std::size_t>(out_) * k_ * k_;
    const std::size_t cols = static_cast<std::size_t>(x.batch) * x.height * x.width;
    std::vector<T> col(rows * cols);
    simd::gemm(Trans::yes, Trans::no, rows, cols, in_, T(1), weight_.value.data(), rows, x.data.data(), cols,
               T(0), col.data(), cols);
    FeatureMap<T> y(out_, x.batch, oh, ow);
    col2im(col.data(), out_, x.batch, oh, ow, k_, s_, p_, x.height, x.width, y.data.data());
    if (has_bias_) add_channel_bias(y, bias_.value);
    return y;
}

template <typename T>
FeatureMap<T> ConvTranspose2d<T>::backward(const FeatureMap<T>& dy, bool param_grads) {
    const std::size_t rows = static_cast<std::size_t>(out_) * k_ * k_;
    const std::size_t cols = static_cast<std::size_t>(x_.batch) * x_.height * x_.width;
    if (dy.channels != out_ || dy.batch != x_.batch) throw ShapeError(weight_.name + ": gradient shape mismatch");
    std::vector<T> dcol(rows * cols);
    im2col(dy.data.data(), out_, dy.batch, dy.height, dy.width, k_, s_, p_, x_.height, x_.width, dcol.data());
    if (param_grads) {
        simd::gemm(Trans::no, Trans::yes, in_, rows, cols, T(1), x_.data.data(), cols, dcol.data(), cols, T(1),
                   weight_.grad.data(), rows);
        if (has_bias_) accumulate_channel_sums(dy, bias_.grad);
    }
    FeatureMap<T> dx(in_, x_.batch, x_.height, x_.width);
    simd::gemm(Trans::no, Trans::no, in_, cols, rows, T(1), weight_.value.data(), rows, dcol.data(), cols, T(0),
               dx.data.data(), cols);
    return dx;
}

template <typename T>
std::vector<Param<T>*> ConvTranspose2d<T>::params() {
    if (has_bias_) return {&weight_, &bias_};
    return {&weight_};
}

template <typename T>
void ConvTranspose2d<T>::init(std::mt19937_64& rng) {
    normal_init(weight_, rng, kInitStd);
    std::fill(bias_.value.begin(), bias_.value.end(), T(0));
}

// --- Dense ------------------------------------------------------------------

template <typename T>
Dense<T>::Dense(std::string name, int in_features, int out_features, bool bias)
    : in_(in_features), out_(out_features), has_bias_(bias),
      weight_(name + ".weight", {std::uint64_t(out_features), std::uint64_t(in_features)}, T(0)),
      bias_(name + ".bias", {std::uint64_t(bias ? out_features : 0)}, T(0)) {}

template <typename T>
FeatureMap<T> Dense<T>::forward(const FeatureMap<T>& x, Mode) {
    if (x.channels != in_ || x.plane() != 1)
        throw ShapeError(weight_.name + ": expected " + std::to_string(in_) + " input features");
    x_ = x;
    FeatureMap<T> y(out_, x.batch, 1, 1);
    simd::gemm(Trans::no, Trans::no, out_, x.batch, in_, T(1), weight_.value.data(), in_, x.data.data(),
               x.batch, T(0), y.data.data(), x.batch);
    if (has_bias_) add_channel_bias(y, bias_.value);
    return y;
}

template <typename T>
FeatureMap<T> Dense<T>::backward(const FeatureMap<T>& dy, bool param_grads) {
    const int n = x_.batch;
    if (dy.channels != out_ || dy.batch != n) throw ShapeError(weight_.name + ": gradient shape mismatch");
    if (param_grads) {
        simd::gemm(Trans::no, Trans::yes, out_, in_, n, T(1), dy.data.data(), n, x_.data.data(), n, T(1),
                   weight_.grad.data(), in_);
        if (has_bias_) accumulate_channel_sums(dy, bias_.grad);
    }
    FeatureMap<T> dx(in_, n, 1, 1);
    simd::gemm(Trans::yes, Trans::no, in_, n, out_, T(1), weight_.value.data(), in_, dy.data.data(), n, T(0),
               dx.data.data(), n);
    return dx;
}

template <typename T>
std::vector<Param<T>*> Dense<T>::params() {
    if (has_bias_) return {&weight_, &bias_};
    return {&weight_};
}

template <typename T>
void Dense<T>::init(std::mt19937_64& rng) {
    normal_init(weight_, rng, kInitStd);
    std::fill(bias_.value.begin(), bias_.value.end(), T(0));
}

// --- BatchNorm --------------------------------------------------------------

template <typename T>
BatchNorm<T>::BatchNorm(std::string name, int channels, double momentum, double eps)
    : channels_(channels), momentum_(momentum), eps_(eps),
      gamma_(name + ".gamma", {std::uint64_t(channels)}, T(1)),
      beta_(name + ".beta", {std::uint64_t(channels)}, T(0)),
      running_mean_(name + ".running_mean", {std::uint64_t(channels)}, T(0), false),
      running_var_(name + ".running_var", {std::uint64_t(channels)}, T(1), false) {}

template <typename T>
FeatureMap<T> BatchNorm<T>::forward(const FeatureMap<T>& x, Mode mode) {
    if (x.channels != channels_) throw ShapeError(gamma_.name + ": channel mismatch");
    const std::size_t m = static_cast<std::size_t>(x.batch) * x.plane();
    FeatureMap<T> y(x.channels, x.batch, x.height, x.width);
    xhat_.resize(x.size());
    inv_std_.resize(channels_);
    last_mode_ = mode;
    for (int c = 0; c < channels_; ++c) {
        const T* src = x.data.data() + c * m;
        double mean, var;
        if (mode == Mode::train) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += src[i];
            mean = s / m;
            double ss = 0.0;
            for (std::size_t i = 0; i < m; ++i) ss += (src[i] - mean) * (src[i] - mean);
            var = ss / m;
            const double unbiased = m > 1 ? var * m / (m - 1) : var;
            running_mean_.value[c] = static_cast<T>((1 - momentum_) * running_mean_.value[c] + momentum_ * mean);
            running_var_.value[c] = static_cast<T>((1 - momentum_) * running_var_.value[c] + momentum_ * unbiased);
        } else {
            mean = running_mean_.value[c];
            var = running_var_.value[c];
        }
        const double inv = 1.0 / std::sqrt(var + eps_);
        inv_std_[c] = static_cast<T>(inv);
        T* xh = xhat_.data() + c * m;
        T* dst = y.data.data() + c * m;
        const T g = gamma_.value[c];
        const T b = beta_.value[c];
        for (std::size_t i = 0; i < m; ++i) {
            xh[i] = static_cast<T>((src[i] - mean) * inv);
            dst[i] = g * xh[i] + b;
        }
    }
    return y;
}

template <typename T>
FeatureMap<T> BatchNorm<T>::backward(const FeatureMap<T>& dy, bool param_grads) {
    if (dy.size() != xhat_.size()) throw ShapeError(gamma_.name + ": gradient shape mismatch");
    const std::size_t m = dy.size() / channels_;
    FeatureMap<T> dx(dy.channels, dy.batch, dy.height, dy.width);
    for (int c = 0; c < channels_; ++c) {
        const T* g = dy.data.data() + c * m;
        const T* xh = xhat_.data() + c * m;
        double sum_dy = 0.0, sum_dy_xh = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            sum_dy += g[i];
            sum_dy_xh += static_cast<double>(g[i]) * xh[i];
        }
        if (param_grads) {
            gamma_.grad[c] += static_cast<T>(sum_dy_xh);
            beta_.grad[c] += static_cast<T>(sum_dy);
        }
        T* out = dx.data.data() + c * m;
        const double scale = static_cast<double>(gamma_.value[c]) * inv_std_[c];
        if (last_mode_ == Mode::eval) {
            for (std::size_t i = 0; i < m; ++i) out[i] = static_cast<T>(scale * g[i]);
        } else {
            const double mean_dy = sum_dy / m;
            const double mean_dy_xh = sum_dy_xh / m;
            for (std::size_t i = 0; i < m; ++i)
                out[i] = static_cast<T>(scale * (g[i] - mean_dy - xh[i] * mean_dy_xh));
        }
    }
    return dx;
}

template <typename T>
std::vector<Param<T>*> BatchNorm<T>::params() {
    return {&gamma_, &beta_, &running_mean_, &running_var_};
}

// --- Activations and reshapes -------------------------------------------------

template <typename T>
FeatureMap<T> LeakyRelu<T>::forward(const FeatureMap<T>& x, Mode) {
    x_ = x;
    FeatureMap<T> y = x;
    for (auto& v : y.data)
        if (v < T(0)) v *= slope_;
    return y;
}

template <typename T>
FeatureMap<T> LeakyRelu<T>::backward(const FeatureMap<T>& dy, bool) {
    FeatureMap<T> dx = dy;
    for (std::size_t i = 0; i < dx.size(); ++i)
        if (x_.data[i] < T(0)) dx.data[i] *= slope_;
    return dx;
}

template <typename T>
FeatureMap<T> Tanh<T>::forward(const FeatureMap<T>& x, Mode) {
    y_ = x;
    for (auto& v : y_.data) v = std::tanh(v);
    return y_;
}

template <typename T>
FeatureMap<T> Tanh<T>::backward(const FeatureMap<T>& dy, bool) {
    FeatureMap<T> dx = dy;
    for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= T(1) - y_.data[i] * y_.data[i];
    return dx;
}

template <typename T>
FeatureMap<T> Flatten<T>::forward(const FeatureMap<T>& x, Mode) {
    c_ = x.channels;
    h_ = x.height;
    w_ = x.width;
    const int hw = h_ * w_;
    FeatureMap<T> y(c_ * hw, x.batch, 1, 1);
    for (int c = 0; c < c_; ++c)
        for (int n = 0; n < x.batch; ++n)
            for (int i = 0; i < hw; ++i)
                y.data[static_cast<std::size_t>(c * hw + i) * x.batch + n] =
                    x.data[(static_cast<std::size_t>(c) * x.batch + n) * hw + i];
    return y;
}

template <typename T>
FeatureMap<T> Flatten<T>::backward(const FeatureMap<T>& dy, bool) {
    return Unflatten<T>(c_, h_, w_).forward(dy, Mode::eval);
}

template <typename T>
FeatureMap<T> Unflatten<T>::forward(const FeatureMap<T>& x, Mode) {
    const int hw = h_ * w_;
    if (x.channels != c_ * hw || x.plane() != 1) throw ShapeError("unflatten: feature count mismatch");
    FeatureMap<T> y(c_, x.batch, h_, w_);
    for (int c = 0; c < c_; ++c)
        for (int n = 0; n < x.batch; ++n)
            for (int i = 0; i < hw; ++i)
                y.data[(static_cast<std::size_t>(c) * x.batch + n) * hw + i] =
                    x.data[static_cast<std::size_t>(c * hw + i) * x.batch + n];
    return y;
}

template <typename T>
FeatureMap<T> Unflatten<T>::backward(const FeatureMap<T>& dy, bool) {
    Flatten<T> inverse;
    return inverse.forward(dy, Mode::eval);
}

// --- Sequential -------------------------------------------------------------

template <typename T>
FeatureMap<T> Sequential<T>::forward(const FeatureMap<T>& x, Mode mode) {
    FeatureMap<T> h = x;
    for (auto& l : layers_) h = l->forward(h, mode);
    return h;
}

template <typename T>
FeatureMap<T> Sequential<T>::backward(const FeatureMap<T>& dy, bool param_grads) {
    FeatureMap<T> g = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g, param_grads);
    return g;
}

template <typename T>
std::vector<Param<T>*> Sequential<T>::params() {
    std::vector<Param<T>*> out;
    for (auto& l : layers_)
        for (auto* p : l->params()) out.push_back(p);
    return out;
}

template <typename T>
void Sequential<T>::init(std::mt19937_64& rng) {
    for (auto& l : layers_) l->init(rng);
}

template <typename T>
void Sequential<T>::zero_grad() {
    for (auto* p : params()) std::fill(p->grad.begin(), p->grad.end(), T(0));
}

#define FLOWGAN_INSTANTIATE(T)                                                                     \
    template struct Param<T>;                                                                      \
    template class Conv2d<T>;                                                                      \
    template class ConvTranspose2d<T>;                                                             \
    template class Dense<T>;                                                                       \
    template class BatchNorm<T>;                                                                   \
    template class LeakyRelu<T>;                                                                   \
    template class Tanh<T>;                                                                        \
    template class Flatten<T>;                                                                     \
    template class Unflatten<T>;                                                                   \
    template class Sequential<T>;

FLOWGAN_INSTANTIATE(float)
FLOWGAN_INSTANTIATE(double)

#undef FLOWGAN_INSTANTIATE

} // namespace flowgan::gan
