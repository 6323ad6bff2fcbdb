#pragma once

#include <memory>
#include <string>
#include <vector>

namespace sdlab::eql {

// Canonical sum-of-terms form: each term is a coefficient times a product
// of variable powers and symbolic unary wrappers (whose arguments are
// again polynomials). Like terms are merged on construction.

enum class Fn { Sin, Cos, Sinh };

const char* fn_name(Fn f);
double fn_eval(Fn f, double x);

struct Polynomial;

struct Factor {
  enum class Kind { Var, Func };
  Kind kind = Kind::Var;
  std::size_t var = 0;                    // Kind::Var
  Fn fn = Fn::Sin;                        // Kind::Func
  std::shared_ptr<const Polynomial> arg;  // Kind::Func
  int power = 1;

  std::string base_key() const;  // power-free, for merging x * x^2 -> x^3
  std::string key() const;
};

struct Term {
  double coeff = 0.0;
  std::vector<Factor> factors;  // kept sorted by key

  std::string key() const;  // coefficient-free signature
  double eval(const std::vector<double>& x) const;
  int degree() const;  // vars count as their power, funcs as 1 per power
};

struct Polynomial {
  std::vector<Term> terms;  // canonical order, no zero coefficients

  static Polynomial constant(double c);
  static Polynomial variable(std::size_t index);

  double eval(const std::vector<double>& x) const;
  bool is_constant() const;
  double constant_value() const;  // valid when is_constant()

  std::string key() const;
};

// guarded algebra; term_limit bounds the expansion
Polynomial poly_add(const Polynomial& a, const Polynomial& b, std::size_t term_limit = 200);
Polynomial poly_scale(const Polynomial& a, double k);
Polynomial poly_mul(const Polynomial& a, const Polynomial& b, std::size_t term_limit = 200);
Polynomial poly_func(Fn f, const Polynomial& arg);  // folds constants

// Readout product of the equation learner: a polynomial plus display names
// for the input variables.
struct SymbolicExpr {
  Polynomial poly;
  std::vector<std::string> var_names;

  double eval(const std::vector<double>& x) const { return poly.eval(x); }
  std::size_t term_count() const { return poly.terms.size(); }
  std::string to_string(int sig_digits = 4) const;
};

struct Dataset {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  std::size_t size() const { return y.size(); }
};

double dataset_mse(const SymbolicExpr& expr, const Dataset& data);

// least squares over the term basis (normal equations with a tiny ridge);
// returns the refitted expression
SymbolicExpr refit_coefficients(const SymbolicExpr& expr, const Dataset& data);

struct SimplifyOptions {
  double tol = 0.05;        // allowed relative MSE increase
  double floor_rel = 1e-6;  // times var(y): treated as the noise scale
  bool refit = true;        // final least-squares pass on survivors
};

// Greedy term dropping under the MSE budget, Occam-style, with an optional
// closing coefficient refit.
SymbolicExpr simplify_equation(const SymbolicExpr& expr, const Dataset& data,
                               SimplifyOptions options = {});

}  // namespace sdlab::eql
