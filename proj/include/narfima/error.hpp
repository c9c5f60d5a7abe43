#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace narfima {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Caller violated a documented precondition (lengths, missing inputs, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class MissingColumnError : public Error {
public:
    explicit MissingColumnError(const std::string& column)
        : Error("missing column '" + column + "'"), column_(column) {}
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

// CSV ingestion failure. `row` is the 1-based data row (header excluded).
class ParseError : public Error {
public:
    ParseError(std::size_t row, const std::string& what)
        : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

// Estimation did not converge or produced an unusable model.
class FitError : public Error {
public:
    FitError(const std::string& what, double best_objective)
        : Error(what), best_objective_(best_objective) {}
    double best_objective() const noexcept { return best_objective_; }

private:
    double best_objective_;
};

class NonInvertibleError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

class SingularError : public Error {
public:
    using Error::Error;
};

}  // namespace narfima
