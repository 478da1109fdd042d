#include "flowgan/flowprep/farneback.hpp"

#include "flowgan/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace flowgan::flowprep {

namespace {

struct Plane {
    int h = 0, w = 0;
    std::vector<float> v;
    Plane() = default;
    Plane(int h_, int w_) : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, 0.f) {}
    float& at(int y, int x) { return v[static_cast<std::size_t>(y) * w + x]; }
    float at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

Plane gray(const RgbImage& img) {
    Plane p(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const auto* px = img.at(y, x);
            p.at(y, x) = 0.299f * px[0] + 0.587f * px[1] + 0.114f * px[2];
        }
    return p;
}

// Separable correlation with replicated borders; kernel index k maps to offset k - r.
Plane correlate(const Plane& src, const std::vector<float>& col_k, const std::vector<float>& row_k) {
    const int rc = static_cast<int>(col_k.size() / 2), rr = static_cast<int>(row_k.size() / 2);
    Plane tmp(src.h, src.w), out(src.h, src.w);
    for (int y = 0; y < src.h; ++y)
        for (int x = 0; x < src.w; ++x) {
            float s = 0;
            for (int k = -rc; k <= rc; ++k) s += col_k[k + rc] * src.at(std::clamp(y + k, 0, src.h - 1), x);
            tmp.at(y, x) = s;
        }
    for (int y = 0; y < src.h; ++y)
        for (int x = 0; x < src.w; ++x) {
            float s = 0;
            for (int k = -rr; k <= rr; ++k) s += row_k[k + rr] * tmp.at(y, std::clamp(x + k, 0, src.w - 1));
            out.at(y, x) = s;
        }
    return out;
}

float sample(const Plane& p, float y, float x) {
    y = std::clamp(y, 0.f, static_cast<float>(p.h - 1));
    x = std::clamp(x, 0.f, static_cast<float>(p.w - 1));
    const int y0 = static_cast<int>(y), x0 = static_cast<int>(x);
    const int y1 = std::min(y0 + 1, p.h - 1), x1 = std::min(x0 + 1, p.w - 1);
    const float fy = y - y0, fx = x - x0;
    return (1 - fy) * ((1 - fx) * p.at(y0, x0) + fx * p.at(y0, x1)) + fy * ((1 - fx) * p.at(y1, x0) + fx * p.at(y1, x1));
}

Plane resize(const Plane& src, int h, int w) {
    Plane out(h, w);
    const float sy = static_cast<float>(src.h) / h, sx = static_cast<float>(src.w) / w;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(y, x) = sample(src, (y + 0.5f) * sy - 0.5f, (x + 0.5f) * sx - 0.5f);
    return out;
}

std::vector<float> gaussian(int r, double sigma) {
    std::vector<float> k(2 * r + 1);
    double s = 0;
    for (int i = -r; i <= r; ++i) s += k[i + r] = static_cast<float>(std::exp(-i * i / (2 * sigma * sigma)));
    for (auto& v : k) v = static_cast<float>(v / s);
    return k;
}

// Quadratic expansion coefficients per pixel: A = [[axx, axy/2], [axy/2, ayy]], b = (bx, by).
struct Expansion {
    Plane bx, by, axx, ayy, axy;
};

Expansion expand(const Plane& f, int n, double sigma) {
    std::vector<float> g(2 * n + 1), xg(2 * n + 1), xxg(2 * n + 1);
    for (int i = -n; i <= n; ++i) {
        g[i + n] = static_cast<float>(std::exp(-i * i / (2 * sigma * sigma)));
        xg[i + n] = i * g[i + n];
        xxg[i + n] = i * i * g[i + n];
    }
    // Weighted normal equations over basis (1, x, y, x^2, y^2, xy); the same for every pixel.
    std::array<std::array<double, 6>, 6> G{};
    for (int y = -n; y <= n; ++y)
        for (int x = -n; x <= n; ++x) {
            const double w = double(g[y + n]) * g[x + n];
            const double bvec[6] = {1.0, double(x), double(y), double(x) * x, double(y) * y, double(x) * y};
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) G[i][j] += w * bvec[i] * bvec[j];
        }
    // Invert G by Gauss-Jordan.
    std::array<std::array<double, 12>, 6> aug{};
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) aug[i][j] = G[i][j];
        aug[i][6 + i] = 1;
    }
    for (int c = 0; c < 6; ++c) {
        int piv = c;
        for (int r = c + 1; r < 6; ++r)
            if (std::abs(aug[r][c]) > std::abs(aug[piv][c])) piv = r;
        std::swap(aug[c], aug[piv]);
        const double d = aug[c][c];
        for (auto& v : aug[c]) v /= d;
        for (int r = 0; r < 6; ++r) {
            if (r == c) continue;
            const double m = aug[r][c];
            for (int j = 0; j < 12; ++j) aug[r][j] -= m * aug[c][j];
        }
    }
    // Projections onto each basis function (column offset = x, row offset = y).
    const Plane r0 = correlate(f, g, g);
    const Plane rx = correlate(f, g, xg);
    const Plane ry = correlate(f, xg, g);
    const Plane rxx = correlate(f, g, xxg);
    const Plane ryy = correlate(f, xxg, g);
    const Plane rxy = correlate(f, xg, xg);
    const Plane* r[6] = {&r0, &rx, &ry, &rxx, &ryy, &rxy};
    Expansion e{Plane(f.h, f.w), Plane(f.h, f.w), Plane(f.h, f.w), Plane(f.h, f.w), Plane(f.h, f.w)};
    Plane* out[5] = {&e.bx, &e.by, &e.axx, &e.ayy, &e.axy};
    for (std::size_t i = 0; i < f.v.size(); ++i)
        for (int k = 0; k < 5; ++k) {
            double s = 0;
            for (int j = 0; j < 6; ++j) s += aug[k + 1][6 + j] * r[j]->v[i];
            out[k]->v[i] = static_cast<float>(s);
        }
    return e;
}

void refine(const Expansion& e1, const Expansion& e2, int window, Plane& u, Plane& v) {
    const int h = u.h, w = u.w;
    Plane g11(h, w), g12(h, w), g22(h, w), h1(h, w), h2(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float du = u.at(y, x), dv = v.at(y, x);
            const float yy = y + dv, xx = x + du;
            const float a11 = 0.5f * (e1.axx.at(y, x) + sample(e2.axx, yy, xx));
            const float a22 = 0.5f * (e1.ayy.at(y, x) + sample(e2.ayy, yy, xx));
            const float a12 = 0.25f * (e1.axy.at(y, x) + sample(e2.axy, yy, xx));
            const float b1 = -0.5f * (sample(e2.bx, yy, xx) - e1.bx.at(y, x)) + a11 * du + a12 * dv;
            const float b2 = -0.5f * (sample(e2.by, yy, xx) - e1.by.at(y, x)) + a12 * du + a22 * dv;
            g11.at(y, x) = a11 * a11 + a12 * a12;
            g12.at(y, x) = a12 * (a11 + a22);
            g22.at(y, x) = a12 * a12 + a22 * a22;
            h1.at(y, x) = a11 * b1 + a12 * b2;
            h2.at(y, x) = a12 * b1 + a22 * b2;
        }
    const std::vector<float> box(static_cast<std::size_t>(window), 1.0f / window);
    g11 = correlate(g11, box, box);
    g12 = correlate(g12, box, box);
    g22 = correlate(g22, box, box);
    h1 = correlate(h1, box, box);
    h2 = correlate(h2, box, box);
    for (std::size_t i = 0; i < u.v.size(); ++i) {
        const double det = double(g11.v[i]) * g22.v[i] - double(g12.v[i]) * g12.v[i] + 1e-3;
        u.v[i] = static_cast<float>((double(g22.v[i]) * h1.v[i] - double(g12.v[i]) * h2.v[i]) / det);
        v.v[i] = static_cast<float>((double(g11.v[i]) * h2.v[i] - double(g12.v[i]) * h1.v[i]) / det);
    }
}

} // namespace

FlowField polynomial_expansion_flow(const RgbImage& a, const RgbImage& b, const PolyFlowParams& p) {
    if (!a.same_size(b)) throw ShapeError("flow frames differ in size");
    if (p.levels < 1 || p.iterations < 1 || p.window < 1 || p.window % 2 == 0 || p.poly_n < 1 || !(p.poly_sigma > 0)
        || !(p.pyr_scale > 0 && p.pyr_scale < 1))
        throw ConfigError("invalid polynomial-expansion flow parameters");

    std::vector<Plane> pa{gray(a)}, pb{gray(b)};
    const auto smooth = gaussian(2, (1 / p.pyr_scale - 1) * 0.5 + 0.5);
    for (int l = 1; l < p.levels; ++l) {
        const int h = static_cast<int>(std::lround(pa.back().h * p.pyr_scale));
        const int w = static_cast<int>(std::lround(pa.back().w * p.pyr_scale));
        if (h < 2 * p.poly_n + 1 || w < 2 * p.poly_n + 1) break;
        pa.push_back(resize(correlate(pa.back(), smooth, smooth), h, w));
        pb.push_back(resize(correlate(pb.back(), smooth, smooth), h, w));
    }

    Plane u, v;
    for (int l = static_cast<int>(pa.size()) - 1; l >= 0; --l) {
        const int h = pa[l].h, w = pa[l].w;
        if (u.v.empty()) {
            u = Plane(h, w);
            v = Plane(h, w);
        } else {
            const float sy = static_cast<float>(h) / u.h, sx = static_cast<float>(w) / u.w;
            u = resize(u, h, w);
            v = resize(v, h, w);
            for (auto& x : u.v) x *= sx;
            for (auto& x : v.v) x *= sy;
        }
        const auto e1 = expand(pa[l], p.poly_n, p.poly_sigma);
        const auto e2 = expand(pb[l], p.poly_n, p.poly_sigma);
        for (int it = 0; it < p.iterations; ++it) refine(e1, e2, p.window, u, v);
    }
    FlowField f(a.height, a.width);
    f.u = std::move(u.v);
    f.v = std::move(v.v);
    return f;
}

} // namespace flowgan::flowprep
