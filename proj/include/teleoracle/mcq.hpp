#pragma once

#include <optional>
#include <string>
#include <vector>

namespace teleoracle {

/// One multiple-choice question. answer_index is 1-based and absent for
/// unlabeled sets.
struct McqItem {
    std::string id;
    std::string question;
    std::vector<std::string> options; // 2..5 entries
    std::optional<int> answer_index;
    std::string explanation;
};

void validate(const McqItem& item);

} // namespace teleoracle
