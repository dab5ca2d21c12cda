#pragma once

#include <initializer_list>
#include <map>
#include <string>
#include <vector>

namespace cma {

using ParamMap = std::map<std::string, std::vector<double>>;

// "t=0.5,a=0.2,0.8" → {t: [0.5], a: [0.2, 0.8]}; `spec` is only used in messages.
ParamMap parse_params(const std::string& text, const std::string& spec);
double scalar_param(const ParamMap& p, const std::string& key, double fallback,
                    const std::string& spec);
void expect_keys(const ParamMap& p, std::initializer_list<const char*> allowed,
                 const std::string& spec);

}  // namespace cma
