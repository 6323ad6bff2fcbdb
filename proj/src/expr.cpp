#include "sdlab/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace sdlab::eql {

const char* fn_name(Fn f) {
  switch (f) {
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Sinh: return "sinh";
  }
  return "?";
}

double fn_eval(Fn f, double x) {
  switch (f) {
    case Fn::Sin: return std::sin(x);
    case Fn::Cos: return std::cos(x);
    case Fn::Sinh: return std::sinh(x);
  }
  return x;
}

namespace {

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void sort_factors(std::vector<Factor>& fs) {
  std::stable_sort(fs.begin(), fs.end(),
                   [](const Factor& a, const Factor& b) { return a.base_key() < b.base_key(); });
}

// merge adjacent factors sharing a base into powers; factors must be sorted
void merge_factors(std::vector<Factor>& fs) {
  std::vector<Factor> out;
  for (auto& f : fs) {
    if (!out.empty() && out.back().base_key() == f.base_key()) {
      out.back().power += f.power;
    } else {
      out.push_back(std::move(f));
    }
  }
  fs = std::move(out);
}

Polynomial canonicalize(std::vector<Term> terms, std::size_t term_limit) {
  std::map<std::string, Term> merged;
  for (auto& t : terms) {
    sort_factors(t.factors);
    merge_factors(t.factors);
    const std::string k = t.key();
    auto it = merged.find(k);
    if (it == merged.end()) {
      merged.emplace(k, std::move(t));
    } else {
      it->second.coeff += t.coeff;
    }
  }
  Polynomial p;
  for (auto& [k, t] : merged) {
    if (t.coeff == 0.0) continue;
    p.terms.push_back(std::move(t));
  }
  if (p.terms.size() > term_limit)
    throw std::runtime_error("symbolic expression exceeded the term limit (" +
                             std::to_string(p.terms.size()) + " terms)");
  return p;
}

}  // namespace

std::string Factor::base_key() const {
  if (kind == Kind::Var) return "x" + std::to_string(var);
  return std::string(fn_name(fn)) + "(" + (arg ? arg->key() : "") + ")";
}

std::string Factor::key() const {
  std::string s = base_key();
  if (power != 1) s += "^" + std::to_string(power);
  return s;
}

std::string Term::key() const {
  std::string s;
  for (const auto& f : factors) {
    if (!s.empty()) s += "*";
    s += f.key();
  }
  return s.empty() ? "1" : s;
}

double Term::eval(const std::vector<double>& x) const {
  double v = coeff;
  for (const auto& f : factors) {
    double base;
    if (f.kind == Factor::Kind::Var) {
      if (f.var >= x.size()) throw std::invalid_argument("expr eval: missing input variable");
      base = x[f.var];
    } else {
      base = fn_eval(f.fn, f.arg->eval(x));
    }
    for (int k = 0; k < f.power; ++k) v *= base;
  }
  return v;
}

int Term::degree() const {
  int d = 0;
  for (const auto& f : factors) d += f.power;
  return d;
}

Polynomial Polynomial::constant(double c) {
  Polynomial p;
  if (c != 0.0) p.terms.push_back(Term{c, {}});
  return p;
}

Polynomial Polynomial::variable(std::size_t index) {
  Polynomial p;
  Factor f;
  f.kind = Factor::Kind::Var;
  f.var = index;
  p.terms.push_back(Term{1.0, {f}});
  return p;
}

double Polynomial::eval(const std::vector<double>& x) const {
  double s = 0.0;
  for (const auto& t : terms) s += t.eval(x);
  return s;
}

bool Polynomial::is_constant() const {
  return terms.empty() || (terms.size() == 1 && terms[0].factors.empty());
}

double Polynomial::constant_value() const {
  if (terms.empty()) return 0.0;
  return terms[0].coeff;
}

std::string Polynomial::key() const {
  std::string s;
  for (const auto& t : terms) {
    if (!s.empty()) s += "+";
    s += fmt_full(t.coeff) + "*" + t.key();
  }
  return s;
}

Polynomial poly_add(const Polynomial& a, const Polynomial& b, std::size_t term_limit) {
  std::vector<Term> terms = a.terms;
  terms.insert(terms.end(), b.terms.begin(), b.terms.end());
  return canonicalize(std::move(terms), term_limit);
}

Polynomial poly_scale(const Polynomial& a, double k) {
  Polynomial p;
  if (k == 0.0) return p;
  p.terms = a.terms;
  for (auto& t : p.terms) t.coeff *= k;
  return p;
}

Polynomial poly_mul(const Polynomial& a, const Polynomial& b, std::size_t term_limit) {
  std::vector<Term> terms;
  terms.reserve(a.terms.size() * b.terms.size());
  for (const auto& ta : a.terms)
    for (const auto& tb : b.terms) {
      Term t;
      t.coeff = ta.coeff * tb.coeff;
      t.factors = ta.factors;
      t.factors.insert(t.factors.end(), tb.factors.begin(), tb.factors.end());
      terms.push_back(std::move(t));
    }
  return canonicalize(std::move(terms), term_limit);
}

Polynomial poly_func(Fn f, const Polynomial& arg) {
  if (arg.is_constant()) return Polynomial::constant(fn_eval(f, arg.constant_value()));
  Polynomial p;
  Factor fac;
  fac.kind = Factor::Kind::Func;
  fac.fn = f;
  fac.arg = std::make_shared<const Polynomial>(arg);
  p.terms.push_back(Term{1.0, {fac}});
  return p;
}

namespace {

std::string fmt_sig(double v, int sig_digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", sig_digits, v);
  return buf;
}

std::string factor_to_string(const Factor& f, const std::vector<std::string>& names,
                             int sig_digits);

std::string poly_to_string_inner(const Polynomial& p, const std::vector<std::string>& names,
                                 int sig_digits) {
  if (p.terms.empty()) return "0";
  std::vector<const Term*> order;
  for (const auto& t : p.terms) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const Term* a, const Term* b) {
    if (a->degree() != b->degree()) return a->degree() > b->degree();
    return a->key() < b->key();
  });
  std::string s;
  for (const Term* t : order) {
    const double c = t->coeff;
    std::string mag = fmt_sig(std::abs(c), sig_digits);
    std::string body;
    for (const auto& f : t->factors) {
      if (!body.empty()) body += "*";
      body += factor_to_string(f, names, sig_digits);
    }
    std::string piece;
    if (body.empty()) {
      piece = mag;
    } else if (mag == "1") {
      piece = body;
    } else {
      piece = mag + "*" + body;
    }
    if (s.empty()) {
      s = (c < 0.0 ? "-" : "") + piece;
    } else {
      s += (c < 0.0 ? " - " : " + ") + piece;
    }
  }
  return s;
}

std::string factor_to_string(const Factor& f, const std::vector<std::string>& names,
                             int sig_digits) {
  std::string s;
  if (f.kind == Factor::Kind::Var) {
    s = f.var < names.size() ? names[f.var] : "x" + std::to_string(f.var + 1);
  } else {
    s = std::string(fn_name(f.fn)) + "(" + poly_to_string_inner(*f.arg, names, sig_digits) + ")";
  }
  if (f.power != 1) s += "^" + std::to_string(f.power);
  return s;
}

}  // namespace

std::string SymbolicExpr::to_string(int sig_digits) const {
  return poly_to_string_inner(poly, var_names, sig_digits);
}

double dataset_mse(const SymbolicExpr& expr, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("dataset_mse: empty dataset");
  double ss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d = expr.eval(data.X[i]) - data.y[i];
    ss += d * d;
  }
  return ss / static_cast<double>(data.size());
}

namespace {

// gauss-jordan with partial pivoting; A is row-major m x m, solved in place
std::vector<double> solve_linear_system(std::vector<double> A, std::vector<double> x,
                                        std::size_t m) {
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(A[r * m + col]) > std::abs(A[piv * m + col])) piv = r;
    for (std::size_t c = 0; c < m; ++c) std::swap(A[piv * m + c], A[col * m + c]);
    std::swap(x[piv], x[col]);
    const double d = A[col * m + col];
    if (d == 0.0) continue;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = A[r * m + col] / d;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < m; ++c) A[r * m + c] -= f * A[col * m + c];
      x[r] -= f * x[col];
    }
  }
  for (std::size_t col = 0; col < m; ++col) {
    const double d = A[col * m + col];
    x[col] = d != 0.0 ? x[col] / d : 0.0;
  }
  return x;
}

// normal equations with a tiny ridge on a precomputed gram system
std::vector<double> solve_gram(std::vector<double> gram, std::vector<double> rhs, std::size_t m) {
  double trace = 0.0;
  for (std::size_t a = 0; a < m; ++a) trace += gram[a * m + a];
  const double ridge = 1e-12 * std::max(trace / static_cast<double>(m), 1.0);
  for (std::size_t a = 0; a < m; ++a) gram[a * m + a] += ridge;
  return solve_linear_system(std::move(gram), std::move(rhs), m);
}

// least squares over raw basis columns
std::vector<double> solve_least_squares(const std::vector<std::vector<double>>& basis,
                                        const std::vector<double>& y) {
  const std::size_t n = y.size();
  const std::size_t m = basis.size();
  std::vector<double> ata(m * m, 0.0), aty(m, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += basis[a][i] * basis[b][i];
      ata[a * m + b] = s;
      ata[b * m + a] = s;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += basis[a][i] * y[i];
    aty[a] = s;
  }
  return solve_gram(std::move(ata), std::move(aty), m);
}

std::vector<std::vector<double>> term_basis(const SymbolicExpr& expr, const Dataset& data) {
  std::vector<std::vector<double>> basis(expr.poly.terms.size(),
                                         std::vector<double>(data.size()));
  for (std::size_t t = 0; t < expr.poly.terms.size(); ++t) {
    Term unit = expr.poly.terms[t];
    unit.coeff = 1.0;
    for (std::size_t i = 0; i < data.size(); ++i) basis[t][i] = unit.eval(data.X[i]);
  }
  return basis;
}

SymbolicExpr with_coefficients(const SymbolicExpr& expr, const std::vector<double>& coeffs) {
  SymbolicExpr out = expr;
  for (std::size_t t = 0; t < out.poly.terms.size(); ++t) out.poly.terms[t].coeff = coeffs[t];
  return out;
}

}  // namespace

SymbolicExpr refit_coefficients(const SymbolicExpr& expr, const Dataset& data) {
  if (expr.poly.terms.empty()) return expr;
  const auto basis = term_basis(expr, data);
  return with_coefficients(expr, solve_least_squares(basis, data.y));
}

SymbolicExpr simplify_equation(const SymbolicExpr& expr, const Dataset& data,
                               SimplifyOptions options) {
  if (expr.poly.terms.empty() || data.size() == 0) return expr;
  const std::size_t n = data.size();
  const std::size_t m = expr.poly.terms.size();

  double ymean = 0.0;
  for (double v : data.y) ymean += v;
  ymean /= static_cast<double>(n);
  double yvar = 0.0;
  for (double v : data.y) yvar += (v - ymean) * (v - ymean);
  yvar /= static_cast<double>(n);

  // the term basis and its gram matrix are computed once; every candidate
  // subset below reuses them
  const auto basis = term_basis(expr, data);
  std::vector<double> gram(m * m), bty(m);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += basis[a][i] * basis[b][i];
      gram[a * m + b] = s;
      gram[b * m + a] = s;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += basis[a][i] * data.y[i];
    bty[a] = s;
  }
  double yty = 0.0;
  for (double v : data.y) yty += v * v;

  auto subset_fit = [&](const std::vector<std::size_t>& active, std::vector<double>& coeffs) {
    const std::size_t k = active.size();
    std::vector<double> sub(k * k);
    std::vector<double> rhs(k);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) sub[a * k + b] = gram[active[a] * m + active[b]];
      rhs[a] = bty[active[a]];
    }
    coeffs = solve_gram(std::move(sub), std::move(rhs), k);
    double mse = yty;
    for (std::size_t a = 0; a < k; ++a) {
      mse -= 2.0 * coeffs[a] * bty[active[a]];
      for (std::size_t b = 0; b < k; ++b)
        mse += coeffs[a] * coeffs[b] * gram[active[a] * m + active[b]];
    }
    return std::max(0.0, mse / static_cast<double>(n));
  };

  auto fixed_mse = [&](const std::vector<std::size_t>& active,
                       const std::vector<double>& coeffs) {
    double mse = yty;
    for (std::size_t a = 0; a < active.size(); ++a) {
      mse -= 2.0 * coeffs[a] * bty[active[a]];
      for (std::size_t b = 0; b < active.size(); ++b)
        mse += coeffs[a] * coeffs[b] * gram[active[a] * m + active[b]];
    }
    return std::max(0.0, mse / static_cast<double>(n));
  };

  std::vector<std::size_t> active(m);
  for (std::size_t i = 0; i < m; ++i) active[i] = i;
  std::vector<double> coeffs(m);
  double mse_pre;
  if (options.refit) {
    mse_pre = subset_fit(active, coeffs);
  } else {
    for (std::size_t i = 0; i < m; ++i) coeffs[i] = expr.poly.terms[i].coeff;
    mse_pre = fixed_mse(active, coeffs);
  }
  // absolute floor keeps exact fits prunable: terms with coefficients at
  // numerical zero move the MSE by less than this
  const double budget = std::max((1.0 + options.tol) * mse_pre,
                                 options.floor_rel * std::max(yvar, 1e-300));

  bool dropped = true;
  while (dropped && active.size() > 1) {
    dropped = false;
    std::size_t best_pos = 0;
    double best_mse = 0.0;
    std::vector<double> best_coeffs;
    bool have = false;
    for (std::size_t t = 0; t < active.size(); ++t) {
      std::vector<std::size_t> cand = active;
      cand.erase(cand.begin() + static_cast<long>(t));
      std::vector<double> c;
      double mse;
      if (options.refit) {
        mse = subset_fit(cand, c);
      } else {
        c = coeffs;
        c.erase(c.begin() + static_cast<long>(t));
        mse = fixed_mse(cand, c);
      }
      if (mse <= budget && (!have || mse < best_mse)) {
        best_pos = t;
        best_mse = mse;
        best_coeffs = std::move(c);
        have = true;
      }
    }
    if (have) {
      active.erase(active.begin() + static_cast<long>(best_pos));
      coeffs = std::move(best_coeffs);
      dropped = true;
    }
  }
  if (options.refit) subset_fit(active, coeffs);

  SymbolicExpr out;
  out.var_names = expr.var_names;
  for (std::size_t a = 0; a < active.size(); ++a) {
    Term t = expr.poly.terms[active[a]];
    t.coeff = coeffs[a];
    if (t.coeff != 0.0) out.poly.terms.push_back(std::move(t));
  }
  return out;
}

}  // namespace sdlab::eql
