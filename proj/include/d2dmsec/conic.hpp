#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "d2dmsec/linalg.hpp"

namespace d2dmsec::conic {

/// Contiguous block of real decision variables in the flat vector x.
/// Complex vectors occupy 2n slots ([Re; Im]); Hermitian d x d matrices
/// occupy d^2 slots (d diagonal entries, then (Re, Im) pairs of the upper
/// triangle in column-major order).
struct VarRef {
    int offset = 0;
    int size = 0;
    int dim = 0;  // complex length or Hermitian dimension; 0 for plain reals
    enum class Kind { reals, complex_vec, hermitian } kind = Kind::reals;
};

/// Affine expression over the flat variable vector.
class LinExpr {
  public:
    LinExpr() = default;
    /*implicit*/ LinExpr(double c) : constant(c) {}

    static LinExpr term(int index, double coeff) {
        LinExpr e;
        e.terms.emplace_back(index, coeff);
        return e;
    }

    LinExpr& operator+=(const LinExpr& o);
    LinExpr& operator-=(const LinExpr& o);
    LinExpr& operator*=(double s);
    friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
    friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
    friend LinExpr operator*(double s, LinExpr a) { return a *= s; }
    friend LinExpr operator*(LinExpr a, double s) { return a *= s; }

    double constant = 0.0;
    std::vector<std::pair<int, double>> terms;
};

struct ComplexExpr {
    LinExpr re, im;
};

/// Hermitian-valued affine map, kept in complex form until lowering.
/// Entries are stored for the lower triangle (row >= col); the diagonal
/// imaginary parts are ignored.
class HermitianAffine {
  public:
    explicit HermitianAffine(int dim);

    int dim() const { return dim_; }
    ComplexExpr& at(int r, int c);              // r >= c
    const ComplexExpr& at(int r, int c) const;

    void add_constant(const CMatrix& h);
    /// adds scale * (A^H V A) where V is a Hermitian variable block
    void add_sandwich(const CMatrix& a, const VarRef& v, double scale);
    /// adds scale * V
    void add_variable(const VarRef& v, double scale);

  private:
    int dim_;
    std::vector<ComplexExpr> entries_;  // packed lower triangle
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_limit };

const char* to_string(SolveStatus s);

struct SolveResult {
    SolveStatus status = SolveStatus::numerical_limit;
    double objective = 0.0;  // value of the maximized expression
    RVector x;               // flat variable values
    int iterations = 0;
    double gap = 0.0, primal_residual = 0.0, dual_residual = 0.0;

    double value(int index) const { return x(index); }
    double value(const LinExpr& e) const;
    CVector complex_vector(const VarRef& v) const;
    CMatrix hermitian(const VarRef& v) const;
};

struct SolveOptions {
    double tol = 1e-8;
    int max_iterations = 100;
    bool verbose = false;
};

class ConicProgram {
  public:
    // ---- variables ----
    int add_scalar(std::string name);
    VarRef add_reals(int n, std::string name);
    VarRef add_complex_vector(int n, std::string name);
    VarRef add_hermitian(int dim, std::string name);

    int num_variables() const { return nvar_; }

    // ---- expression helpers ----
    /// a^H w for a complex parameter vector and a complex variable block
    ComplexExpr inner(const CVector& a, const VarRef& w) const;
    /// Tr(H V): real for Hermitian parameter H and Hermitian variable V
    LinExpr trace_product(const CMatrix& h, const VarRef& v) const;
    LinExpr trace(const VarRef& v) const;
    LinExpr diagonal_entry(const VarRef& v, int i) const;

    // ---- constraints ----
    void add_eq(LinExpr e, std::string label = {});            // e == 0
    void add_ineq(LinExpr e, std::string label = {});          // e >= 0
    void add_soc(LinExpr t, std::vector<LinExpr> v, std::string label = {});  // t >= ||v||_2
    void add_psd(HermitianAffine h, std::string label = {});   // h(x) is PSD
    void add_psd(const VarRef& v, std::string label = {});     // Hermitian variable is PSD

    /// Installs the SOC relaxation of 1 + a >= e^phi built from u_terms
    /// repeated squarings of a degree-4 kernel, with u_terms + 4 fresh
    /// slack variables. Accuracy improves as u_terms grows; u_terms = 6
    /// keeps the bound within 1e-4 over |phi| <= 5.
    void add_exp_upper(const LinExpr& a, const LinExpr& phi, int u_terms,
                       std::string label = {});

    void set_objective_maximize(LinExpr e) { objective_ = std::move(e); }

    SolveResult solve(const SolveOptions& opts = {}) const;

    /// One constraint per line, for external verification of built programs.
    void dump(std::ostream& os) const;

    int num_constraints() const;

  private:
    friend struct Lowering;
    struct LinCon { LinExpr e; std::string label; };
    struct SocCon { LinExpr t; std::vector<LinExpr> v; std::string label; };
    struct PsdCon { HermitianAffine h; std::string label; };

    int nvar_ = 0;
    std::vector<std::string> names_;
    std::vector<LinCon> eqs_, ineqs_;
    std::vector<SocCon> socs_;
    std::vector<PsdCon> psds_;
    LinExpr objective_;
};

}  // namespace d2dmsec::conic
