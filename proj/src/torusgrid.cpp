#include "hessianlab/torusgrid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace hessianlab {

TorusGrid::TorusGrid(int n_, int N_) : n(n_), N(N_) {
    if (n < 1 || n > 2) throw std::invalid_argument("TorusGrid: n must be 1 or 2");
    if (N < 8 || N % 2 != 0) throw std::invalid_argument("TorusGrid: N must be even and >= 8");
}

std::size_t TorusGrid::points() const {
    std::size_t p = 1;
    for (int a = 0; a < axes(); ++a) p *= static_cast<std::size_t>(N);
    return p;
}

double TorusGrid::volume_element() const {
    double v = 1.0;
    for (int a = 0; a < axes(); ++a) v *= h();
    return v;
}

std::vector<double> TorusGrid::coords(std::size_t p) const {
    std::vector<double> c(static_cast<size_t>(axes()));
    for (int a = axes() - 1; a >= 0; --a) {
        c[static_cast<size_t>(a)] = static_cast<double>(p % static_cast<std::size_t>(N)) * h();
        p /= static_cast<std::size_t>(N);
    }
    return c;
}

std::size_t TorusGrid::shift(std::size_t p, int axis, int d) const {
    // stride of the last axis is 1
    std::size_t stride = 1;
    for (int a = axes() - 1; a > axis; --a) stride *= static_cast<std::size_t>(N);
    std::size_t i = (p / stride) % static_cast<std::size_t>(N);
    long j = (static_cast<long>(i) + d) % N;
    if (j < 0) j += N;
    return p + (static_cast<std::size_t>(j) - i) * stride;
}

ScalarField::ScalarField(const TorusGrid& g, double fill) : grid(g), v(g.points(), fill) {}

HermitianField::HermitianField(const TorusGrid& g)
    : grid(g), m(g.points() * static_cast<std::size_t>(g.n) * static_cast<std::size_t>(g.n)) {}

HermitianField HermitianField::scaled_identity(const TorusGrid& g, double t) {
    HermitianField f(g);
    for (std::size_t p = 0; p < g.points(); ++p)
        for (int i = 0; i < g.n; ++i) f.set(p, i, i, t);
    return f;
}

std::complex<double> HermitianField::at(std::size_t p, int i, int j) const {
    return m[(p * static_cast<std::size_t>(grid.n) + static_cast<std::size_t>(i)) *
                 static_cast<std::size_t>(grid.n) +
             static_cast<std::size_t>(j)];
}

void HermitianField::set(std::size_t p, int i, int j, std::complex<double> value) {
    auto idx = [&](int a, int b) {
        return (p * static_cast<std::size_t>(grid.n) + static_cast<std::size_t>(a)) *
                   static_cast<std::size_t>(grid.n) +
               static_cast<std::size_t>(b);
    };
    if (i == j) {
        m[idx(i, i)] = value.real();
    } else {
        m[idx(i, j)] = value;
        m[idx(j, i)] = std::conj(value);
    }
}

void HermitianField::symmetrize() {
    for (std::size_t p = 0; p < grid.points(); ++p)
        for (int i = 0; i < grid.n; ++i)
            for (int j = i; j < grid.n; ++j) {
                auto a = at(p, i, j), b = at(p, j, i);
                set(p, i, j, 0.5 * (a + std::conj(b)));
            }
}

namespace {

struct FftWorkspace {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    std::vector<std::complex<double>> buf;
    std::size_t points = 0;
};

std::mutex g_fft_mutex;
std::map<std::pair<int, int>, FftWorkspace> g_fft;

FftWorkspace& fft_workspace(const TorusGrid& g) {
    auto key = std::make_pair(g.n, g.N);
    auto it = g_fft.find(key);
    if (it != g_fft.end()) return it->second;
    FftWorkspace ws;
    ws.points = g.points();
    ws.buf.resize(ws.points);
    std::vector<int> dims(static_cast<size_t>(g.axes()), g.N);
    auto* data = reinterpret_cast<fftw_complex*>(ws.buf.data());
    ws.fwd = fftw_plan_dft(g.axes(), dims.data(), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    ws.bwd = fftw_plan_dft(g.axes(), dims.data(), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
    return g_fft.emplace(key, std::move(ws)).first->second;
}

// integer frequency along one axis for mode index m
inline int freq(int m, int N) { return m <= N / 2 ? (m == N / 2 ? -N / 2 : m) : m - N; }

ScalarField fd2_second_derivative(const ScalarField& phi, int a, int b) {
    const TorusGrid& g = phi.grid;
    ScalarField out(g);
    const double h2 = g.h() * g.h();
    if (a == b) {
        for (std::size_t p = 0; p < g.points(); ++p)
            out[p] = (phi[g.shift(p, a, 1)] - 2.0 * phi[p] + phi[g.shift(p, a, -1)]) / h2;
    } else {
        for (std::size_t p = 0; p < g.points(); ++p) {
            std::size_t pp = g.shift(g.shift(p, a, 1), b, 1);
            std::size_t pm = g.shift(g.shift(p, a, 1), b, -1);
            std::size_t mp = g.shift(g.shift(p, a, -1), b, 1);
            std::size_t mm = g.shift(g.shift(p, a, -1), b, -1);
            out[p] = (phi[pp] - phi[pm] - phi[mp] + phi[mm]) / (4.0 * h2);
        }
    }
    return out;
}

double pairwise_sum(const double* x, std::size_t count) {
    if (count <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) s += x[i];
        return s;
    }
    std::size_t half = count / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, count - half);
}

} // namespace

ScalarField spectral_second_derivative(const ScalarField& phi, int axis_a, int axis_b) {
    const TorusGrid& g = phi.grid;
    if (axis_a < 0 || axis_a >= g.axes() || axis_b < 0 || axis_b >= g.axes())
        throw std::invalid_argument("spectral_second_derivative: axis out of range");
    std::lock_guard<std::mutex> lock(g_fft_mutex);
    FftWorkspace& ws = fft_workspace(g);
    for (std::size_t p = 0; p < ws.points; ++p) ws.buf[p] = phi[p];
    fftw_execute(ws.fwd);
    const int N = g.N;
    const int axes = g.axes();
    std::vector<int> idx(static_cast<size_t>(axes), 0);
    for (std::size_t p = 0; p < ws.points; ++p) {
        double factor;
        if (axis_a == axis_b) {
            int k = freq(idx[static_cast<size_t>(axis_a)], N);
            factor = -(2.0 * M_PI * k) * (2.0 * M_PI * k);
        } else {
            int ma = idx[static_cast<size_t>(axis_a)], mb = idx[static_cast<size_t>(axis_b)];
            // first-derivative factors: Nyquist mode carries no odd derivative
            int ka = (ma == N / 2) ? 0 : freq(ma, N);
            int kb = (mb == N / 2) ? 0 : freq(mb, N);
            factor = -(2.0 * M_PI * ka) * (2.0 * M_PI * kb);
        }
        ws.buf[p] *= factor;
        for (int a = axes - 1; a >= 0; --a) {
            if (++idx[static_cast<size_t>(a)] < N) break;
            idx[static_cast<size_t>(a)] = 0;
        }
    }
    fftw_execute(ws.bwd);
    ScalarField out(g);
    const double scale = 1.0 / static_cast<double>(ws.points);
    for (std::size_t p = 0; p < ws.points; ++p) out[p] = ws.buf[p].real() * scale;
    return out;
}

ScalarField quarter_laplacian_inverse(const ScalarField& f) {
    const TorusGrid& g = f.grid;
    std::lock_guard<std::mutex> lock(g_fft_mutex);
    FftWorkspace& ws = fft_workspace(g);
    for (std::size_t p = 0; p < ws.points; ++p) ws.buf[p] = f[p];
    fftw_execute(ws.fwd);
    const int N = g.N;
    const int axes = g.axes();
    std::vector<int> idx(static_cast<size_t>(axes), 0);
    for (std::size_t p = 0; p < ws.points; ++p) {
        double sym = 0.0; // symbol of (1/4) Laplacian: -pi^2 |k|^2
        for (int a = 0; a < axes; ++a) {
            int k = freq(idx[static_cast<size_t>(a)], N);
            sym -= M_PI * M_PI * k * k;
        }
        ws.buf[p] = sym == 0.0 ? 0.0 : ws.buf[p] / sym;
        for (int a = axes - 1; a >= 0; --a) {
            if (++idx[static_cast<size_t>(a)] < N) break;
            idx[static_cast<size_t>(a)] = 0;
        }
    }
    fftw_execute(ws.bwd);
    ScalarField out(g);
    const double scale = 1.0 / static_cast<double>(ws.points);
    for (std::size_t p = 0; p < ws.points; ++p) out[p] = ws.buf[p].real() * scale;
    return out;
}

HermitianField ddc(const ScalarField& phi, DiffMethod method) {
    const TorusGrid& g = phi.grid;
    auto d2 = [&](int a, int b) {
        return method == DiffMethod::spectral ? spectral_second_derivative(phi, a, b)
                                              : fd2_second_derivative(phi, a, b);
    };
    HermitianField out(g);
    for (int i = 0; i < g.n; ++i) {
        const int xi = 2 * i, yi = 2 * i + 1;
        for (int j = i; j < g.n; ++j) {
            const int xj = 2 * j, yj = 2 * j + 1;
            ScalarField re = d2(xi, xj) + d2(yi, yj);
            if (i == j) {
                for (std::size_t p = 0; p < g.points(); ++p)
                    out.set(p, i, i, 0.25 * re[p]);
            } else {
                ScalarField im = d2(xi, yj) - d2(yi, xj);
                for (std::size_t p = 0; p < g.points(); ++p)
                    out.set(p, i, j, std::complex<double>(0.25 * re[p], 0.25 * im[p]));
            }
        }
    }
    return out;
}

Spectrum hermitian_eigenvalues(const std::complex<double>* a, int n) {
    if (n == 1) return {a[0].real()};
    std::vector<std::complex<double>> m(a, a + static_cast<std::size_t>(n) * n);
    auto at = [&](int i, int j) -> std::complex<double>& {
        return m[static_cast<std::size_t>(i) * n + j];
    };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(at(p, q));
        if (std::sqrt(off) < 1e-13) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                std::complex<double> apq = at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double app = at(p, p).real(), aqq = at(q, q).real();
                std::complex<double> phase = apq / std::abs(apq);
                double tau = (aqq - app) / (2.0 * std::abs(apq));
                double t = (tau >= 0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                // columns p, q rotate by [[c, s*phase],[-s*conj(phase), c]]
                for (int r = 0; r < n; ++r) {
                    std::complex<double> mrp = at(r, p), mrq = at(r, q);
                    at(r, p) = c * mrp - s * std::conj(phase) * mrq;
                    at(r, q) = s * phase * mrp + c * mrq;
                }
                for (int r = 0; r < n; ++r) {
                    std::complex<double> mpr = at(p, r), mqr = at(q, r);
                    at(p, r) = c * mpr - s * phase * mqr;
                    at(q, r) = s * std::conj(phase) * mpr + c * mqr;
                }
            }
    }
    Spectrum lam(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) lam[static_cast<std::size_t>(i)] = at(i, i).real();
    std::sort(lam.begin(), lam.end());
    return lam;
}

std::vector<Spectrum> eigenvalues(const HermitianField& omega0, const HermitianField& A) {
    if (!(omega0.grid == A.grid))
        throw std::invalid_argument("eigenvalues: grids differ");
    const TorusGrid& g = A.grid;
    const int n = g.n;
    std::vector<Spectrum> out(g.points());
    std::vector<std::complex<double>> L(static_cast<std::size_t>(n) * n);
    std::vector<std::complex<double>> B(static_cast<std::size_t>(n) * n);
    for (std::size_t p = 0; p < g.points(); ++p) {
        // Cholesky omega0 = L L^*
        std::fill(L.begin(), L.end(), std::complex<double>(0.0));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) {
                std::complex<double> s = omega0.at(p, i, j);
                for (int k = 0; k < j; ++k)
                    s -= L[static_cast<std::size_t>(i) * n + k] *
                         std::conj(L[static_cast<std::size_t>(j) * n + k]);
                if (i == j) {
                    double d = s.real();
                    if (!(d > 0.0))
                        throw std::runtime_error("eigenvalues: omega0 not positive definite at point " +
                                                 std::to_string(p));
                    L[static_cast<std::size_t>(i) * n + j] = std::sqrt(d);
                } else {
                    L[static_cast<std::size_t>(i) * n + j] =
                        s / L[static_cast<std::size_t>(j) * n + j].real();
                }
            }
        }
        // B = L^{-1} A L^{-*} via forward/back substitution
        // first X = L^{-1} A  (solve L X = A column-wise)
        std::vector<std::complex<double>> X(static_cast<std::size_t>(n) * n);
        for (int col = 0; col < n; ++col)
            for (int i = 0; i < n; ++i) {
                std::complex<double> s = A.at(p, i, col);
                for (int k = 0; k < i; ++k)
                    s -= L[static_cast<std::size_t>(i) * n + k] * X[static_cast<std::size_t>(k) * n + col];
                X[static_cast<std::size_t>(i) * n + col] = s / L[static_cast<std::size_t>(i) * n + i].real();
            }
        // then B = X L^{-*}: solve B L^* = X row-wise
        for (int row = 0; row < n; ++row)
            for (int j = 0; j < n; ++j) {
                std::complex<double> s = X[static_cast<std::size_t>(row) * n + j];
                for (int k = 0; k < j; ++k)
                    s -= B[static_cast<std::size_t>(row) * n + k] *
                         std::conj(L[static_cast<std::size_t>(j) * n + k]);
                B[static_cast<std::size_t>(row) * n + j] = s / L[static_cast<std::size_t>(j) * n + j].real();
            }
        out[p] = hermitian_eigenvalues(B.data(), n);
    }
    return out;
}

std::vector<Spectrum> eigenvalues(const HermitianField& A) {
    const TorusGrid& g = A.grid;
    std::vector<Spectrum> out(g.points());
    for (std::size_t p = 0; p < g.points(); ++p)
        out[p] = hermitian_eigenvalues(&A.m[p * static_cast<std::size_t>(g.n) * g.n], g.n);
    return out;
}

double integrate(const ScalarField& f) {
    return pairwise_sum(f.v.data(), f.v.size()) * f.grid.volume_element();
}

double mean(const ScalarField& f) {
    return pairwise_sum(f.v.data(), f.v.size()) / static_cast<double>(f.v.size());
}

double norm_linf(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::fabs(x));
    return m;
}

double norm_l1(const ScalarField& f) {
    std::vector<double> a(f.v.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::fabs(f.v[i]);
    return pairwise_sum(a.data(), a.size()) * f.grid.volume_element();
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("field addition: grids differ");
    ScalarField out = a;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += b.v[i];
    return out;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("field subtraction: grids differ");
    ScalarField out = a;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] -= b.v[i];
    return out;
}

ScalarField operator*(double s, const ScalarField& a) {
    ScalarField out = a;
    for (double& x : out.v) x *= s;
    return out;
}

namespace {

void write_header(std::ostream& os, const TorusGrid& g, const char* kind, bool binary) {
    os << "torus " << g.n << " " << g.N << " " << kind << " " << (binary ? "binary" : "text")
       << "\n";
}

struct Header {
    TorusGrid grid;
    std::string kind;
    bool binary = false;
};

Header read_header(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("field file: missing header");
    std::istringstream ss(line);
    std::string magic, kind, mode;
    int n = 0, N = 0;
    ss >> magic >> n >> N >> kind >> mode;
    if (magic != "torus" || (mode != "text" && mode != "binary"))
        throw std::runtime_error("field file: bad header '" + line + "'");
    return {TorusGrid(n, N), kind, mode == "binary"};
}

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

void write_scalar_field(std::ostream& os, const ScalarField& f, bool binary) {
    write_header(os, f.grid, "scalar", binary);
    if (binary) {
        os.write(reinterpret_cast<const char*>(f.v.data()),
                 static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    } else {
        for (double x : f.v) os << fmt17(x) << "\n";
    }
}

ScalarField read_scalar_field(std::istream& is) {
    Header h = read_header(is);
    if (h.kind != "scalar") throw std::runtime_error("field file: expected scalar field");
    ScalarField f(h.grid);
    if (h.binary) {
        is.read(reinterpret_cast<char*>(f.v.data()),
                static_cast<std::streamsize>(f.v.size() * sizeof(double)));
        if (!is) throw std::runtime_error("field file: truncated binary data");
    } else {
        for (double& x : f.v)
            if (!(is >> x)) throw std::runtime_error("field file: truncated text data");
    }
    return f;
}

void write_hermitian_field(std::ostream& os, const HermitianField& f, bool binary) {
    write_header(os, f.grid, "herm", binary);
    if (binary) {
        os.write(reinterpret_cast<const char*>(f.m.data()),
                 static_cast<std::streamsize>(f.m.size() * sizeof(std::complex<double>)));
    } else {
        const int n2 = f.grid.n * f.grid.n;
        for (std::size_t p = 0; p < f.grid.points(); ++p) {
            for (int e = 0; e < n2; ++e) {
                const auto& z = f.m[p * static_cast<std::size_t>(n2) + static_cast<std::size_t>(e)];
                os << (e ? " " : "") << fmt17(z.real()) << " " << fmt17(z.imag());
            }
            os << "\n";
        }
    }
}

HermitianField read_hermitian_field(std::istream& is) {
    Header h = read_header(is);
    if (h.kind != "herm") throw std::runtime_error("field file: expected hermitian field");
    HermitianField f(h.grid);
    if (h.binary) {
        is.read(reinterpret_cast<char*>(f.m.data()),
                static_cast<std::streamsize>(f.m.size() * sizeof(std::complex<double>)));
        if (!is) throw std::runtime_error("field file: truncated binary data");
    } else {
        for (auto& z : f.m) {
            double re, im;
            if (!(is >> re >> im)) throw std::runtime_error("field file: truncated text data");
            z = {re, im};
        }
    }
    f.symmetrize();
    return f;
}

namespace {
template <class WriteFn>
void save_to(const std::string& path, bool binary, WriteFn&& fn) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    fn(os);
}
} // namespace

void save_scalar_field(const std::string& path, const ScalarField& f, bool binary) {
    save_to(path, binary, [&](std::ostream& os) { write_scalar_field(os, f, binary); });
}

ScalarField load_scalar_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    return read_scalar_field(is);
}

void save_hermitian_field(const std::string& path, const HermitianField& f, bool binary) {
    save_to(path, binary, [&](std::ostream& os) { write_hermitian_field(os, f, binary); });
}

HermitianField load_hermitian_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    return read_hermitian_field(is);
}

} // namespace hessianlab
