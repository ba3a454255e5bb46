#include "wf/message.hpp"

#include "wf/errors.hpp"

namespace wf {

std::string to_string(MessageKind kind)
{
    return kind == MessageKind::request ? "request" : "answer";
}

nlohmann::json to_json(const Message& m)
{
    return {{"kind", to_string(m.kind)}, {"case_id", m.case_id}, {"sender", m.sender},
            {"recipient", m.recipient}, {"artifact", to_json(m.artifact)}, {"seq", m.seq}};
}

Message message_from_json(const nlohmann::json& doc)
{
    try {
        Message m;
        std::string kind = doc.at("kind").get<std::string>();
        if (kind == "request")
            m.kind = MessageKind::request;
        else if (kind == "answer")
            m.kind = MessageKind::answer;
        else
            throw ModelError("unknown message kind '" + kind + "'");
        m.case_id = doc.at("case_id").get<std::string>();
        m.sender = doc.at("sender").get<std::string>();
        m.recipient = doc.at("recipient").get<std::string>();
        m.artifact = artifact_from_json(doc.at("artifact"));
        m.seq = doc.value("seq", std::uint64_t{0});
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed message: ") + e.what());
    }
}

}  // namespace wf
