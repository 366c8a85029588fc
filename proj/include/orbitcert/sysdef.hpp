#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbitcert {

// ---------------------------------------------------------------------------
// Spaces
// ---------------------------------------------------------------------------

enum class SpaceKind { box, torus };

// A flat phase space: an axis-aligned box with the Euclidean metric, or a flat torus
// (per-axis periods) with the wrap-minimizing quotient metric.
struct SpaceSpec {
    SpaceKind kind = SpaceKind::box;
    int dim = 0;
    std::vector<double> lo;       // box lower bounds; zeros for torus
    std::vector<double> hi;       // box upper bounds; periods for torus
    double period(int axis) const { return hi[axis]; }
    double width(int axis) const { return hi[axis] - lo[axis]; }
};

// Axis-aligned sub-box (the isolated region a system is studied on).
struct Region {
    std::vector<double> lo;
    std::vector<double> hi;
    int dim() const { return static_cast<int>(lo.size()); }
    double width(int axis) const { return hi[axis] - lo[axis]; }
};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class ExprKind { number, var, neg, add, sub, mul, div, pow, sin, cos, exp, tanh, sqrt, abs };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprKind kind;
    double number = 0.0;   // ExprKind::number
    int var_index = 0;     // ExprKind::var
    int exponent = 0;      // ExprKind::pow
    ExprPtr lhs;           // unary operand / left operand / pow base
    ExprPtr rhs;           // right operand
};

ExprPtr make_number(double v);
ExprPtr make_var(int index);
ExprPtr make_unary(ExprKind kind, ExprPtr operand);
ExprPtr make_binary(ExprKind kind, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_pow(ExprPtr base, int exponent);

bool expr_equal(const Expr& a, const Expr& b);
std::string print_expr(const Expr& e);

// Flattened postfix program for fast evaluation in integrator loops. Each instruction
// remembers the printed source fragment it came from so domain errors can point at it.
struct CompiledField {
    struct Instr {
        ExprKind op;
        double number = 0.0;
        int var_index = 0;
        int exponent = 0;
        int text_id = -1;
    };
    int dim_in = 0;
    std::vector<std::vector<Instr>> coord_programs;
    std::vector<std::string> texts;
    int max_stack = 0;

    // Evaluates into out[0..dim). Returns -1 on success, else the text id of the
    // offending subexpression (division by zero, sqrt of a negative).
    int eval(const double* point, double* out, double* stack) const;
};

CompiledField compile_field(const std::vector<ExprPtr>& field, int dim);

// ---------------------------------------------------------------------------
// Systems
// ---------------------------------------------------------------------------

struct SystemSpec {
    std::string name;
    SpaceSpec space;
    std::vector<ExprPtr> field;          // one expression per coordinate
    Region isolated_region;              // defaults to the full space
    std::map<std::string, double> params;  // catalog parameters (recorded for reports)
    CompiledField compiled;
};

using SystemPtr = std::shared_ptr<const SystemSpec>;

struct ParseError : std::runtime_error {
    int line;
    int col;
    ParseError(std::string msg, int line_, int col_)
        : std::runtime_error(std::move(msg)), line(line_), col(col_) {}
};

struct EvalDomainError : std::runtime_error {
    std::string subexpression;
    EvalDomainError(std::string msg, std::string subexpr)
        : std::runtime_error(std::move(msg)), subexpression(std::move(subexpr)) {}
};

// Parses a full system definition document:
//   name = <identifier>
//   space = box(lo,hi[; lo,hi]...) | torus(period[, period]...)
//   region = box(lo,hi[; lo,hi]...)        (optional)
//   dx<k> = <expression>                   (exactly once per coordinate)
// Throws ParseError with 1-based line/column on any malformed input.
SystemSpec parse_system(const std::string& text);

// Canonical text document for a system; parse_system(print_system(s)) reproduces s.
std::string print_system(const SystemSpec& spec);

// Parses a single field expression against a given dimension (used by tests/tools).
ExprPtr parse_expression(const std::string& text, int dim);

// Vector field at p. Torus coordinates are wrapped into [0, period) first; box points are
// evaluated as-is (escape policing belongs to the integrator, not the field).
std::vector<double> eval_field(const SystemSpec& spec, const std::vector<double>& p);

// Wraps a point into the fundamental domain of the space (identity for boxes).
std::vector<double> normalize_point(const SpaceSpec& space, std::vector<double> p);

// Built-in catalog: pitchfork1d, circle_ns, torus_linear (requires "alpha"), saddle2d.
SystemSpec builtin_system(const std::string& name,
                          const std::map<std::string, double>& params = {});
std::vector<std::string> builtin_names();

Region full_space_region(const SpaceSpec& space);

}  // namespace orbitcert
