#pragma once

#include "wf/artifact.hpp"

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace wf {

enum class MessageKind { request, answer };

struct Message {
    MessageKind kind = MessageKind::request;
    std::string case_id;
    std::string sender;
    std::string recipient;
    Artifact artifact;
    std::uint64_t seq = 0;  ///< per (sender, recipient, case) channel
};

std::string to_string(MessageKind kind);
nlohmann::json to_json(const Message& m);
Message message_from_json(const nlohmann::json& doc);

}  // namespace wf
