#include "aif/params.hpp"

#include <cmath>

#include "aif/errors.hpp"

namespace aif {

void ParameterVector::validate() const {
    const std::size_t p = static_cast<std::size_t>(values.size());
    if (p < 1) throw DimensionError("ParameterVector: dimension must be >= 1");
    if (names.size() != p || ivp_mask.size() != p)
        throw DimensionError("ParameterVector: values/names/ivp_mask lengths disagree");
    for (int i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]))
            throw DomainError("ParameterVector: non-finite value at coordinate '" + names[i] + "'");
}

ParameterVector ParameterVector::make(Eigen::VectorXd values, std::vector<std::string> names,
                                      std::vector<bool> ivp_mask) {
    ParameterVector pv{std::move(values), std::move(names), std::move(ivp_mask)};
    pv.validate();
    return pv;
}

ParameterVector ParameterVector::plain(Eigen::VectorXd values) {
    const int p = static_cast<int>(values.size());
    std::vector<std::string> names(p);
    for (int i = 0; i < p; ++i) names[i] = "p" + std::to_string(i + 1);
    return make(std::move(values), std::move(names), std::vector<bool>(p, false));
}

int ParameterVector::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

bool CoordTransform::in_domain(double natural) const {
    switch (kind) {
        case TransformKind::Identity: return std::isfinite(natural);
        case TransformKind::Log: return natural > 0.0 && std::isfinite(natural);
        case TransformKind::Logit: return natural > lower && natural < upper;
    }
    return false;
}

double CoordTransform::forward(double natural) const {
    switch (kind) {
        case TransformKind::Identity: return natural;
        case TransformKind::Log: return std::log(natural);
        case TransformKind::Logit: return std::log((natural - lower) / (upper - natural));
    }
    return natural;
}

double CoordTransform::inverse(double estimation) const {
    switch (kind) {
        case TransformKind::Identity: return estimation;
        case TransformKind::Log: return std::exp(estimation);
        case TransformKind::Logit: {
            // overflow-safe sigmoid
            if (estimation >= 0.0) {
                const double e = std::exp(-estimation);
                return lower + (upper - lower) / (1.0 + e);
            }
            const double e = std::exp(estimation);
            return lower + (upper - lower) * e / (1.0 + e);
        }
    }
    return estimation;
}

namespace {

std::string coord_label(int i, const std::vector<std::string>* names) {
    if (names && i < static_cast<int>(names->size()))
        return "'" + (*names)[i] + "' (index " + std::to_string(i) + ")";
    return "index " + std::to_string(i);
}

const char* kind_name(TransformKind k) {
    switch (k) {
        case TransformKind::Identity: return "identity";
        case TransformKind::Log: return "log";
        case TransformKind::Logit: return "logit";
    }
    return "?";
}

}  // namespace

Eigen::VectorXd ParamTransform::forward(const Eigen::VectorXd& natural,
                                        const std::vector<std::string>* names) const {
    if (natural.size() != dim())
        throw DimensionError("ParamTransform::forward: dimension mismatch");
    Eigen::VectorXd out(natural.size());
    for (int i = 0; i < natural.size(); ++i) {
        const CoordTransform& c = coords_[i];
        if (!c.in_domain(natural[i]))
            throw DomainError(std::string(kind_name(c.kind)) +
                              " transform domain violation at coordinate " +
                              coord_label(i, names) + ": value " + std::to_string(natural[i]));
        out[i] = c.forward(natural[i]);
    }
    return out;
}

Eigen::VectorXd ParamTransform::inverse(const Eigen::VectorXd& estimation) const {
    if (estimation.size() != dim())
        throw DimensionError("ParamTransform::inverse: dimension mismatch");
    Eigen::VectorXd out(estimation.size());
    inverse_into({estimation.data(), static_cast<std::size_t>(estimation.size())},
                 {out.data(), static_cast<std::size_t>(out.size())});
    return out;
}

void ParamTransform::inverse_into(std::span<const double> estimation,
                                  std::span<double> natural) const {
    for (std::size_t i = 0; i < estimation.size(); ++i)
        natural[i] = coords_[i].inverse(estimation[i]);
}

ParameterVector transform_params(const ParameterVector& natural, const ParamTransform& t) {
    natural.validate();
    ParameterVector out = natural;
    out.values = t.forward(natural.values, &natural.names);
    return out;
}

ParameterVector inverse_transform_params(const ParameterVector& estimation,
                                         const ParamTransform& t) {
    estimation.validate();
    ParameterVector out = estimation;
    out.values = t.inverse(estimation.values);
    return out;
}

}  // namespace aif
