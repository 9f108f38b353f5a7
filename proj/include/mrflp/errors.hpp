#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mrflp {

/// Malformed or out-of-range user input.
class InvalidInputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Cholesky pivot <= 0. `index()` is the (unpermuted) column that failed.
class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(const std::string& what, int index)
        : std::runtime_error(what), index_(index) {}
    int index() const noexcept { return index_; }

private:
    int index_;
};

class RankDeficientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every node is seeded; the seed assignment is the solution.
class DegenerateProblemError : public std::runtime_error {
public:
    DegenerateProblemError(const std::string& what, std::vector<double> labels)
        : std::runtime_error(what), labels_(std::move(labels)) {}
    const std::vector<double>& labels() const noexcept { return labels_; }

private:
    std::vector<double> labels_;
};

/// A connected component without any seed; the relaxed problem is not unique.
class UnseededComponentError : public std::runtime_error {
public:
    UnseededComponentError(const std::string& what, int component)
        : std::runtime_error(what), component_(component) {}
    int component() const noexcept { return component_; }

private:
    int component_;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unknown session, or no result stored for the requested method.
class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mrflp
