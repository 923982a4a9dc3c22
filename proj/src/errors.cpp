#include "chaosfolio/errors.hpp"

namespace chaosfolio
{

const char* to_string(ErrorCode code) noexcept
{
    switch (code)
    {
    case ErrorCode::MissingCell: return "MissingCell";
    case ErrorCode::NonMonotoneDates: return "NonMonotoneDates";
    case ErrorCode::DuplicateAssetName: return "DuplicateAssetName";
    case ErrorCode::UnparseableNumber: return "UnparseableNumber";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::DegenerateAsset: return "DegenerateAsset";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotTwoAssets: return "NotTwoAssets";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::NoRealCycle: return "NoRealCycle";
    case ErrorCode::TooManyAssets: return "TooManyAssets";
    case ErrorCode::TooFewAssets: return "TooFewAssets";
    case ErrorCode::TooFewBifurcations: return "TooFewBifurcations";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NoExcessReturn: return "NoExcessReturn";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::NoDoublingFound: return "NoDoublingFound";
    case ErrorCode::DegenerateOrbit: return "DegenerateOrbit";
    }
    return "Unknown";
}

bool is_input_error(ErrorCode code) noexcept
{
    switch (code)
    {
    case ErrorCode::Infeasible:
    case ErrorCode::NoExcessReturn:
    case ErrorCode::NumericalFailure:
    case ErrorCode::NoDoublingFound:
    case ErrorCode::DegenerateOrbit:
        return false;
    default:
        return true;
    }
}

} // namespace chaosfolio
