#pragma once

#include <stdexcept>
#include <string>

namespace elab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid domain, grid or coefficient data.
class GeometryError : public Error {
public:
    using Error::Error;
};

class MeasureError : public Error {
public:
    using Error::Error;
};

/// Config validation failure. `where` is "line N" or a section.key path.
class ConfigError : public Error {
public:
    ConfigError(std::string where, const std::string& what)
        : Error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}

    [[nodiscard]] const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

/// Linear solver breakdown; carries the achieved relative residual.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace elab
