#pragma once

#include "hessianlab/symfunc.hpp"

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace hessianlab {

/// Periodic grid on the flat torus C^n/(Z^n + iZ^n), n in {1,2}.
/// Real axes in lexicographic order (x1, y1[, x2, y2]); N samples per axis.
struct TorusGrid {
    int n = 1;
    int N = 8;

    TorusGrid() = default;
    TorusGrid(int n_, int N_);

    double h() const { return 1.0 / N; }
    int axes() const { return 2 * n; }
    std::size_t points() const;
    double volume_element() const;

    /// Real coordinate of a point index along each axis, in [0,1).
    std::vector<double> coords(std::size_t p) const;

    /// Index arithmetic: neighbor of p displaced by d grid steps along axis a.
    std::size_t shift(std::size_t p, int axis, int d) const;

    bool operator==(const TorusGrid& o) const { return n == o.n && N == o.N; }
};

struct ScalarField {
    TorusGrid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const TorusGrid& g, double fill = 0.0);

    double& operator[](std::size_t p) { return v[p]; }
    double operator[](std::size_t p) const { return v[p]; }
};

/// One n x n Hermitian matrix per grid point; Hermitian symmetry is made
/// exact on construction and after every mutation through set().
struct HermitianField {
    TorusGrid grid;
    std::vector<std::complex<double>> m; // points * n * n, row-major

    HermitianField() = default;
    explicit HermitianField(const TorusGrid& g);

    /// chi = t * identity at every point.
    static HermitianField scaled_identity(const TorusGrid& g, double t);

    std::complex<double> at(std::size_t p, int i, int j) const;
    void set(std::size_t p, int i, int j, std::complex<double> value);

    void symmetrize();
};

enum class DiffMethod { spectral, fd2 };

/// Matrix of mixed complex second derivatives of a real field.
HermitianField ddc(const ScalarField& phi, DiffMethod method);

/// Spectral second derivative d^2/dx_a dx_b of a field (used by the solver's
/// Laplacian preconditioner as well).
ScalarField spectral_second_derivative(const ScalarField& phi, int axis_a, int axis_b);

/// Mean-zero u with (1/4) Laplacian u = f - mean(f), by Fourier division;
/// the flat-Laplacian preconditioner of the periodic solver.
ScalarField quarter_laplacian_inverse(const ScalarField& f);

/// Eigenvalues of A with respect to omega0 (generalized Hermitian problem),
/// ascending order per point. omega0 must be positive definite everywhere.
std::vector<Spectrum> eigenvalues(const HermitianField& omega0, const HermitianField& A);

/// Plain Hermitian eigenvalues (omega0 = identity).
std::vector<Spectrum> eigenvalues(const HermitianField& A);

/// Cyclic Jacobi eigenvalues of one small Hermitian matrix (row-major n x n),
/// ascending; iterates until the off-diagonal norm is below 1e-13.
Spectrum hermitian_eigenvalues(const std::complex<double>* a, int n);

double integrate(const ScalarField& f);   // midpoint rule, unit volume
double norm_linf(const ScalarField& f);
double norm_l1(const ScalarField& f);
double mean(const ScalarField& f);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);

/// Field file format. Text: header "torus n N scalar|herm text" then one
/// point per line ("%.17g", bit-exact round-trip); binary: same header with
/// "binary" and raw little-endian doubles in the same order.
void write_scalar_field(std::ostream& os, const ScalarField& f, bool binary = false);
ScalarField read_scalar_field(std::istream& is);
void write_hermitian_field(std::ostream& os, const HermitianField& f, bool binary = false);
HermitianField read_hermitian_field(std::istream& is);

void save_scalar_field(const std::string& path, const ScalarField& f, bool binary = false);
ScalarField load_scalar_field(const std::string& path);
void save_hermitian_field(const std::string& path, const HermitianField& f, bool binary = false);
HermitianField load_hermitian_field(const std::string& path);

} // namespace hessianlab
