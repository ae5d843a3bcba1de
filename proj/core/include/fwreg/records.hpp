#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fwreg {

struct FullDataRecord {
    std::vector<double> x;
    double y = 0.0;
};

// r is y.has_value(); a missing response cannot be read.
struct MarRecord {
    std::vector<double> x;
    std::vector<double> z;
    std::optional<double> y;
    int r() const { return y.has_value() ? 1 : 0; }
};

struct ShadowRecord {
    std::vector<double> x;
    std::vector<double> w;
    std::optional<double> y;
    int r() const { return y.has_value() ? 1 : 0; }
};

struct CateRecord {
    std::vector<double> x;
    int a = 0;
    double y = 0.0;
};

struct ProximalRecord {
    std::vector<double> x;
    std::vector<double> z;
    std::vector<double> w;
    int a = 0;
    double y = 0.0;
};

struct DoseResponseRecord {
    std::vector<double> l;
    double a = 0.0;
    double y = 0.0;
};

struct IvRecord {
    std::vector<double> x;
    int z = 0;
    int a = 0;
    double y = 0.0;
};

using ObservedRecord = std::variant<FullDataRecord, MarRecord, ShadowRecord, CateRecord, ProximalRecord,
                                    DoseResponseRecord, IvRecord>;

enum class Setting { fulldata, mar, shadow, cate, proximal, dose, iv };

Setting parse_setting(const std::string& name);
std::string setting_name(Setting s);
Setting setting_of(const ObservedRecord& rec);

// The covariate the target regression is a function of (x, or a for dose-response).
std::vector<double> target_covariates(const ObservedRecord& rec);

}  // namespace fwreg
