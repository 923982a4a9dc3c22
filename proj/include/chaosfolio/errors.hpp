#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chaosfolio
{

/// Every failure the library reports carries one of these codes.
enum class ErrorCode
{
    // input / validation
    MissingCell,
    NonMonotoneDates,
    DuplicateAssetName,
    UnparseableNumber,
    MalformedInput,
    TooFewObservations,
    DegenerateAsset,
    DimensionMismatch,
    NotTwoAssets,
    ParamOutOfRange,
    NoRealCycle,
    TooManyAssets,
    TooFewAssets,
    TooFewBifurcations,
    // computational
    Infeasible,
    NoExcessReturn,
    NumericalFailure,
    NoDoublingFound,
    DegenerateOrbit,
};

const char* to_string(ErrorCode code) noexcept;

/// True for codes caused by bad user input rather than by a failed computation.
bool is_input_error(ErrorCode code) noexcept;

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// CSV validation failure pinned to a data row (1-based, header excluded) and column.
class CsvError : public Error
{
public:
    CsvError(ErrorCode code, std::size_t row, std::size_t column, const std::string& message)
        : Error(code, "row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + message),
          row_(row), column_(column)
    {
    }

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

} // namespace chaosfolio
