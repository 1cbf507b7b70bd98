// Line-protocol adapter stand-in for tests.
//   fake_adapter echo   one span covering the whole text
//   fake_adapter bad    one span whose text disagrees with its offsets
//   fake_adapter range  one span running past the end of the text
//   fake_adapter crash  exits without replying
//   fake_adapter embed  {id, vector} with a letter-count embedding of "text"
#include <array>
#include <cctype>
#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "echo";
  if (mode == "crash") return 3;
  std::string line;
  while (std::getline(std::cin, line)) {
    const auto req = nlohmann::json::parse(line);
    const std::string text = req.value("text", "");
    nlohmann::json reply = {{"id", req.value("id", "")}};
    if (mode == "embed") {
      std::array<double, 26> v{};
      for (unsigned char c : text)
        if (std::isalpha(c)) v[static_cast<std::size_t>(std::tolower(c) - 'a')] += 1.0;
      reply["vector"] = v;
    } else if (mode == "bad") {
      reply["spans"] = {{{"start", 0}, {"end", text.size()}, {"label", "EDU"}, {"text", text + "!"}}};
    } else if (mode == "range") {
      reply["spans"] = {{{"start", 0}, {"end", text.size() + 5}, {"label", "EDU"}}};
    } else {
      reply["spans"] = {{{"start", 0}, {"end", text.size()}, {"label", "EDU"}, {"text", text}}};
    }
    std::cout << reply.dump() << '\n' << std::flush;
  }
  return 0;
}
