#pragma once

#include <array>
#include <string_view>

namespace dilemma::detail {

struct PromptAsset {
    std::string_view file;
    std::string_view text;
};

extern const std::array<PromptAsset, 6> kPromptAssets;

}  // namespace dilemma::detail
