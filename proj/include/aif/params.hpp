#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

namespace aif {

// Named parameter vector with an initial-value-parameter mask. Whether values
// are on the natural or the estimation scale is a property of the call site;
// estimation code works on the transformed scale throughout.
struct ParameterVector {
    Eigen::VectorXd values;
    std::vector<std::string> names;
    std::vector<bool> ivp_mask;

    int dim() const { return static_cast<int>(values.size()); }

    // Throws DimensionError/DomainError on violated invariants.
    void validate() const;

    static ParameterVector make(Eigen::VectorXd values, std::vector<std::string> names,
                                std::vector<bool> ivp_mask);
    // All-false ivp mask, names p1..pN.
    static ParameterVector plain(Eigen::VectorXd values);

    int index_of(const std::string& name) const;  // -1 when absent
};

enum class TransformKind { Identity, Log, Logit };

// One coordinate's map between natural and estimation scale.
struct CoordTransform {
    TransformKind kind = TransformKind::Identity;
    double lower = 0.0;  // logit bounds
    double upper = 1.0;

    bool in_domain(double natural) const;
    double forward(double natural) const;    // natural -> estimation
    double inverse(double estimation) const; // estimation -> natural

    static CoordTransform identity() { return {}; }
    static CoordTransform log() { return {TransformKind::Log, 0.0, 0.0}; }
    static CoordTransform logit(double lo = 0.0, double hi = 1.0) {
        return {TransformKind::Logit, lo, hi};
    }
};

class ParamTransform {
public:
    ParamTransform() = default;
    explicit ParamTransform(std::vector<CoordTransform> coords) : coords_(std::move(coords)) {}

    static ParamTransform identity(int dim) {
        return ParamTransform(std::vector<CoordTransform>(dim));
    }

    int dim() const { return static_cast<int>(coords_.size()); }
    const CoordTransform& coord(int i) const { return coords_[i]; }

    // Errors name the offending coordinate; names optional.
    Eigen::VectorXd forward(const Eigen::VectorXd& natural,
                            const std::vector<std::string>* names = nullptr) const;
    Eigen::VectorXd inverse(const Eigen::VectorXd& estimation) const;

    // Allocation-free variants used in the particle hot path.
    void inverse_into(std::span<const double> estimation, std::span<double> natural) const;

private:
    std::vector<CoordTransform> coords_;
};

ParameterVector transform_params(const ParameterVector& natural, const ParamTransform& t);
ParameterVector inverse_transform_params(const ParameterVector& estimation, const ParamTransform& t);

}  // namespace aif
