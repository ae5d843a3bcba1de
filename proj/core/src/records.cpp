#include "fwreg/records.hpp"

#include "fwreg/error.hpp"

namespace fwreg {

Setting parse_setting(const std::string& name) {
    if (name == "fulldata") return Setting::fulldata;
    if (name == "mar") return Setting::mar;
    if (name == "shadow") return Setting::shadow;
    if (name == "cate") return Setting::cate;
    if (name == "proximal") return Setting::proximal;
    if (name == "dose") return Setting::dose;
    if (name == "iv") return Setting::iv;
    raise(ErrorCode::config, "unknown setting '" + name + "'");
}

std::string setting_name(Setting s) {
    switch (s) {
        case Setting::fulldata: return "fulldata";
        case Setting::mar: return "mar";
        case Setting::shadow: return "shadow";
        case Setting::cate: return "cate";
        case Setting::proximal: return "proximal";
        case Setting::dose: return "dose";
        case Setting::iv: return "iv";
    }
    return "?";
}

Setting setting_of(const ObservedRecord& rec) { return static_cast<Setting>(rec.index()); }

std::vector<double> target_covariates(const ObservedRecord& rec) {
    if (const auto* d = std::get_if<DoseResponseRecord>(&rec)) return {d->a};
    return std::visit(
        [](const auto& r) -> std::vector<double> {
            if constexpr (requires { r.x; })
                return r.x;
            else
                return {};
        },
        rec);
}

}  // namespace fwreg
