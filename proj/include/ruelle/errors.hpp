#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ruelle {

// Typed errors; every message names the violated precondition.

class tail_escape_error : public std::runtime_error {
public:
    tail_escape_error(const std::string& what, int step)
        : std::runtime_error(what), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

class history_exhausted_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class normalization_required_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class precondition_error : public std::runtime_error {
public:
    precondition_error(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

class not_conjugate_error : public std::runtime_error {
public:
    not_conjugate_error(const std::string& what, double deviation)
        : std::runtime_error(what), deviation_(deviation) {}
    double deviation() const { return deviation_; }

private:
    double deviation_;
};

class invariant_set_violation_error : public std::runtime_error {
public:
    invariant_set_violation_error(const std::string& what, std::vector<int> cells)
        : std::runtime_error(what), cells_(std::move(cells)) {}
    const std::vector<int>& offending_cells() const { return cells_; }

private:
    std::vector<int> cells_;
};

class abs_continuity_error : public std::runtime_error {
public:
    abs_continuity_error(const std::string& what, std::vector<int> cells)
        : std::runtime_error(what), cells_(std::move(cells)) {}
    const std::vector<int>& offending_cells() const { return cells_; }

private:
    std::vector<int> cells_;
};

class must_discretize_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class no_convergence_error : public std::runtime_error {
public:
    no_convergence_error(const std::string& what, double last_residual, int iterations)
        : std::runtime_error(what), last_residual_(last_residual), iterations_(iterations) {}
    double last_residual() const { return last_residual_; }
    int iterations() const { return iterations_; }

private:
    double last_residual_;
    int iterations_;
};

class size_limit_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class inconsistent_certificate_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class invalid_coupling_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ruelle
