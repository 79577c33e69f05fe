#include "d2dmsec/conic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace d2dmsec::conic {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::numerical_limit: return "numerical-limit";
    }
    return "unknown";
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
    constant += o.constant;
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
    constant -= o.constant;
    for (const auto& [i, c] : o.terms) terms.emplace_back(i, -c);
    return *this;
}

LinExpr& LinExpr::operator*=(double s) {
    constant *= s;
    for (auto& [i, c] : terms) c *= s;
    return *this;
}

// ---------------------------------------------------------------- variables

int ConicProgram::add_scalar(std::string name) {
    names_.push_back(std::move(name));
    return nvar_++;
}

VarRef ConicProgram::add_reals(int n, std::string name) {
    VarRef v{nvar_, n, 0, VarRef::Kind::reals};
    for (int i = 0; i < n; ++i) names_.push_back(name + "[" + std::to_string(i) + "]");
    nvar_ += n;
    return v;
}

VarRef ConicProgram::add_complex_vector(int n, std::string name) {
    VarRef v{nvar_, 2 * n, n, VarRef::Kind::complex_vec};
    for (int i = 0; i < n; ++i) names_.push_back("Re(" + name + "[" + std::to_string(i) + "])");
    for (int i = 0; i < n; ++i) names_.push_back("Im(" + name + "[" + std::to_string(i) + "])");
    nvar_ += 2 * n;
    return v;
}

VarRef ConicProgram::add_hermitian(int dim, std::string name) {
    VarRef v{nvar_, dim * dim, dim, VarRef::Kind::hermitian};
    for (int i = 0; i < dim; ++i)
        names_.push_back(name + "[" + std::to_string(i) + "," + std::to_string(i) + "]");
    for (int c = 0; c < dim; ++c)
        for (int r = 0; r < c; ++r) {
            names_.push_back("Re(" + name + "[" + std::to_string(r) + "," + std::to_string(c) + "])");
            names_.push_back("Im(" + name + "[" + std::to_string(r) + "," + std::to_string(c) + "])");
        }
    nvar_ += dim * dim;
    return v;
}

namespace {

// index of (r, c), r < c, within the packed upper-triangle pair list
int pair_index(int dim, int r, int c) {
    // pairs are stored column-major: (0,1), (0,2), (1,2), (0,3), ...
    (void)dim;
    return c * (c - 1) / 2 + r;
}

}  // namespace

// Hermitian variable entry (r, c) with r <= c as a complex expression.
static ComplexExpr hermitian_entry(const VarRef& v, int r, int c) {
    ComplexExpr e;
    if (r == c) {
        e.re = LinExpr::term(v.offset + r, 1.0);
        return e;
    }
    const int base = v.offset + v.dim + 2 * pair_index(v.dim, r, c);
    e.re = LinExpr::term(base, 1.0);
    e.im = LinExpr::term(base + 1, 1.0);
    return e;
}

// ------------------------------------------------------------- expressions

ComplexExpr ConicProgram::inner(const CVector& a, const VarRef& w) const {
    if (w.kind != VarRef::Kind::complex_vec || a.size() != w.dim)
        throw std::invalid_argument("inner: complex vector variable of matching length required");
    ComplexExpr e;
    // a^H w = sum conj(a_i) (wr_i + i wi_i)
    for (int i = 0; i < w.dim; ++i) {
        const Complex ac = std::conj(a(i));
        const int re_i = w.offset + i, im_i = w.offset + w.dim + i;
        if (ac.real() != 0.0) {
            e.re.terms.emplace_back(re_i, ac.real());
            e.im.terms.emplace_back(im_i, ac.real());
        }
        if (ac.imag() != 0.0) {
            e.re.terms.emplace_back(im_i, -ac.imag());
            e.im.terms.emplace_back(re_i, ac.imag());
        }
    }
    return e;
}

LinExpr ConicProgram::trace_product(const CMatrix& h, const VarRef& v) const {
    if (v.kind != VarRef::Kind::hermitian || h.rows() != v.dim || h.cols() != v.dim)
        throw std::invalid_argument("trace_product: Hermitian variable of matching dimension required");
    // Tr(H V) = sum_i H_ii V_ii + 2 sum_{r<c} [Re H_rc Re V_rc + Im H_rc Im V_rc]
    // (with V_rc = x + i y for r < c and H Hermitian the result is real)
    LinExpr e;
    for (int i = 0; i < v.dim; ++i) {
        const double c = h(i, i).real();
        if (c != 0.0) e.terms.emplace_back(v.offset + i, c);
    }
    for (int c = 0; c < v.dim; ++c)
        for (int r = 0; r < c; ++r) {
            const int base = v.offset + v.dim + 2 * pair_index(v.dim, r, c);
            const Complex hrc = h(r, c);
            if (hrc.real() != 0.0) e.terms.emplace_back(base, 2.0 * hrc.real());
            if (hrc.imag() != 0.0) e.terms.emplace_back(base + 1, 2.0 * hrc.imag());
        }
    return e;
}

LinExpr ConicProgram::trace(const VarRef& v) const {
    if (v.kind != VarRef::Kind::hermitian)
        throw std::invalid_argument("trace: Hermitian variable required");
    LinExpr e;
    for (int i = 0; i < v.dim; ++i) e.terms.emplace_back(v.offset + i, 1.0);
    return e;
}

LinExpr ConicProgram::diagonal_entry(const VarRef& v, int i) const {
    if (v.kind != VarRef::Kind::hermitian || i >= v.dim)
        throw std::invalid_argument("diagonal_entry: out of range");
    return LinExpr::term(v.offset + i, 1.0);
}

// ---------------------------------------------------------- HermitianAffine

HermitianAffine::HermitianAffine(int dim) : dim_(dim), entries_(dim * (dim + 1) / 2) {}

namespace {
int lower_index(int dim, int r, int c) {
    // packed lower triangle, column-major: col c starts after
    // sum_{k<c} (dim - k) entries
    return c * dim - c * (c - 1) / 2 + (r - c);
}
}  // namespace

ComplexExpr& HermitianAffine::at(int r, int c) {
    if (r < c || r >= dim_) throw std::invalid_argument("HermitianAffine::at: need r >= c");
    return entries_[lower_index(dim_, r, c)];
}

const ComplexExpr& HermitianAffine::at(int r, int c) const {
    if (r < c || r >= dim_) throw std::invalid_argument("HermitianAffine::at: need r >= c");
    return entries_[lower_index(dim_, r, c)];
}

void HermitianAffine::add_constant(const CMatrix& h) {
    if (h.rows() != dim_ || h.cols() != dim_)
        throw std::invalid_argument("HermitianAffine: dimension mismatch");
    for (int c = 0; c < dim_; ++c)
        for (int r = c; r < dim_; ++r) {
            at(r, c).re.constant += h(r, c).real();
            if (r != c) at(r, c).im.constant += h(r, c).imag();
        }
}

void HermitianAffine::add_variable(const VarRef& v, double scale) {
    if (v.kind != VarRef::Kind::hermitian || v.dim != dim_)
        throw std::invalid_argument("HermitianAffine: Hermitian variable of matching dim required");
    for (int c = 0; c < dim_; ++c)
        for (int r = c; r < dim_; ++r) {
            ComplexExpr e = hermitian_entry(v, c, r);  // (c, r) with c <= r: entry (r, c) = conj
            // V_{rc} = conj(V_{cr}) for r > c; stored pairs represent the upper
            // triangle, so the lower-triangle imaginary part flips sign.
            at(r, c).re += scale * e.re;
            if (r != c) at(r, c).im -= scale * e.im;
        }
}

void HermitianAffine::add_sandwich(const CMatrix& a, const VarRef& v, double scale) {
    if (v.kind != VarRef::Kind::hermitian || a.rows() != v.dim || a.cols() != dim_)
        throw std::invalid_argument("HermitianAffine: sandwich dimension mismatch");
    // (A^H V A)_{rc} = b_r^H V b_c with b_j = A e_j = column j of A
    const int d = v.dim;
    for (int c = 0; c < dim_; ++c) {
        for (int r = c; r < dim_; ++r) {
            const CVector br = a.col(r), bc = a.col(c);
            // sum over V entries: diag + pairs
            ComplexExpr acc;
            for (int i = 0; i < d; ++i) {
                const Complex coef = std::conj(br(i)) * bc(i) * scale;
                if (coef != Complex(0, 0)) {
                    acc.re.terms.emplace_back(v.offset + i, coef.real());
                    acc.im.terms.emplace_back(v.offset + i, coef.imag());
                }
            }
            for (int cc = 0; cc < d; ++cc)
                for (int rr = 0; rr < cc; ++rr) {
                    // V_{rr,cc} = x + iy, V_{cc,rr} = x - iy
                    const int base = v.offset + d + 2 * pair_index(d, rr, cc);
                    const Complex f1 = std::conj(br(rr)) * bc(cc) * scale;  // multiplies x + iy
                    const Complex f2 = std::conj(br(cc)) * bc(rr) * scale;  // multiplies x - iy
                    const Complex fx = f1 + f2;
                    const Complex fy = Complex(0, 1) * (f1 - f2);
                    if (fx != Complex(0, 0)) {
                        acc.re.terms.emplace_back(base, fx.real());
                        acc.im.terms.emplace_back(base, fx.imag());
                    }
                    if (fy != Complex(0, 0)) {
                        acc.re.terms.emplace_back(base + 1, fy.real());
                        acc.im.terms.emplace_back(base + 1, fy.imag());
                    }
                }
            at(r, c).re += acc.re;
            if (r != c) at(r, c).im += acc.im;
        }
    }
}

// -------------------------------------------------------------- constraints

void ConicProgram::add_eq(LinExpr e, std::string label) {
    eqs_.push_back({std::move(e), std::move(label)});
}

void ConicProgram::add_ineq(LinExpr e, std::string label) {
    ineqs_.push_back({std::move(e), std::move(label)});
}

void ConicProgram::add_soc(LinExpr t, std::vector<LinExpr> v, std::string label) {
    if (v.empty()) {
        add_ineq(std::move(t), std::move(label));
        return;
    }
    socs_.push_back({std::move(t), std::move(v), std::move(label)});
}

void ConicProgram::add_psd(HermitianAffine h, std::string label) {
    psds_.push_back({std::move(h), std::move(label)});
}

void ConicProgram::add_psd(const VarRef& v, std::string label) {
    HermitianAffine h(v.dim);
    h.add_variable(v, 1.0);
    add_psd(std::move(h), std::move(label));
}

void ConicProgram::add_exp_upper(const LinExpr& a, const LinExpr& phi, int u_terms,
                                 std::string label) {
    if (u_terms < 3) throw std::invalid_argument("add_exp_upper: need u_terms >= 3");
    const int u = u_terms;
    VarRef q = add_reals(u + 4, label.empty() ? "q" : label + ".q");
    auto qv = [&](int i) { return LinExpr::term(q.offset + i - 1, 1.0); };  // 1-based

    const double inv_pow = std::ldexp(1.0, -u);  // 2^-u

    // 1 + q1 >= || (1 - q1, 2 + phi / 2^(u-1)) ||
    add_soc(1.0 + qv(1), {1.0 - qv(1), LinExpr(2.0) + 2.0 * inv_pow * phi}, label + ".l7");
    // 1 + q2 >= || (1 - q2, 5/3 + phi / 2^u) ||
    add_soc(1.0 + qv(2), {1.0 - qv(2), LinExpr(5.0 / 3.0) + inv_pow * phi}, label + ".l6");
    // 1 + q3 >= || (1 - q3, 2 q1) ||
    add_soc(1.0 + qv(3), {1.0 - qv(3), 2.0 * qv(1)}, label + ".l5");
    // q4 >= 19/72 + q2 + q3 / 24
    add_ineq(qv(4) - 19.0 / 72.0 - qv(2) - (1.0 / 24.0) * qv(3), label + ".l4");
    // 1 + qi >= || (1 - qi, 2 q_{i-1}) ||, i = 5..u+3
    for (int i = 5; i <= u + 3; ++i)
        add_soc(1.0 + qv(i), {1.0 - qv(i), 2.0 * qv(i - 1)}, label + ".l3_" + std::to_string(i));
    // 1 + q_{u+4} >= || (1 - q_{u+4}, 2 q_{u+3}) ||
    add_soc(1.0 + qv(u + 4), {1.0 - qv(u + 4), 2.0 * qv(u + 3)}, label + ".l2");
    // 1 + a >= q_{u+4}
    add_ineq(LinExpr(1.0) + a - qv(u + 4), label + ".l1");
}

int ConicProgram::num_constraints() const {
    return static_cast<int>(eqs_.size() + ineqs_.size() + socs_.size() + psds_.size());
}

// --------------------------------------------------------------------- dump

namespace {

void print_expr(std::ostream& os, const LinExpr& e, const std::vector<std::string>& names) {
    std::map<int, double> acc;
    for (const auto& [i, c] : e.terms) acc[i] += c;
    bool first = true;
    for (const auto& [i, c] : acc) {
        if (c == 0.0) continue;
        if (!first) os << (c >= 0 ? " + " : " - ");
        else if (c < 0) os << "-";
        os << std::abs(c) << "*" << names[i];
        first = false;
    }
    if (e.constant != 0.0 || first) {
        if (!first) os << (e.constant >= 0 ? " + " : " - ");
        else if (e.constant < 0) os << "-";
        os << std::abs(e.constant);
    }
}

}  // namespace

void ConicProgram::dump(std::ostream& os) const {
    os << "maximize: ";
    print_expr(os, objective_, names_);
    os << "\n";
    for (const auto& c : eqs_) {
        os << "eq";
        if (!c.label.empty()) os << "[" << c.label << "]";
        os << ": ";
        print_expr(os, c.e, names_);
        os << " == 0\n";
    }
    for (const auto& c : ineqs_) {
        os << "ineq";
        if (!c.label.empty()) os << "[" << c.label << "]";
        os << ": ";
        print_expr(os, c.e, names_);
        os << " >= 0\n";
    }
    for (const auto& c : socs_) {
        os << "soc";
        if (!c.label.empty()) os << "[" << c.label << "]";
        os << ": ";
        print_expr(os, c.t, names_);
        os << " >= norm(";
        for (size_t i = 0; i < c.v.size(); ++i) {
            if (i) os << "; ";
            print_expr(os, c.v[i], names_);
        }
        os << ")\n";
    }
    for (const auto& c : psds_) {
        os << "psd";
        if (!c.label.empty()) os << "[" << c.label << "]";
        os << " dim=" << c.h.dim() << ":";
        for (int col = 0; col < c.h.dim(); ++col)
            for (int row = col; row < c.h.dim(); ++row) {
                os << " (" << row << "," << col << ")=[";
                print_expr(os, c.h.at(row, col).re, names_);
                os << " | ";
                print_expr(os, c.h.at(row, col).im, names_);
                os << "]";
            }
        os << "\n";
    }
}

// ------------------------------------------------------------------ results

double SolveResult::value(const LinExpr& e) const {
    double v = e.constant;
    for (const auto& [i, c] : e.terms) v += c * x(i);
    return v;
}

CVector SolveResult::complex_vector(const VarRef& v) const {
    CVector out(v.dim);
    for (int i = 0; i < v.dim; ++i)
        out(i) = Complex(x(v.offset + i), x(v.offset + v.dim + i));
    return out;
}

CMatrix SolveResult::hermitian(const VarRef& v) const {
    CMatrix out(v.dim, v.dim);
    for (int i = 0; i < v.dim; ++i) out(i, i) = x(v.offset + i);
    for (int c = 0; c < v.dim; ++c)
        for (int r = 0; r < c; ++r) {
            const int base = v.offset + v.dim + 2 * pair_index(v.dim, r, c);
            out(r, c) = Complex(x(base), x(base + 1));
            out(c, r) = std::conj(out(r, c));
        }
    return out;
}

}  // namespace d2dmsec::conic
