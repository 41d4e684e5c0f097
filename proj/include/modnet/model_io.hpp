#ifndef MODNET_MODEL_IO_HPP
#define MODNET_MODEL_IO_HPP

#include <string>

#include "modnet/model.hpp"

namespace modnet {

// JSON model files with an explicit schema version. Doubles use the shortest
// decimal form that parses back to the identical bits, so save -> load is an
// exact round trip. Writes are temp-then-rename.
void save_model(const ModuleNetwork& net, const std::string& path);

// Validates on load: schema version, tree structure, parents/tested-variable
// sync, acyclic module graph (CycleError carries the witness).
ModuleNetwork load_model(const std::string& path);

std::string model_to_json(const ModuleNetwork& net);
ModuleNetwork model_from_json(const std::string& text);

}  // namespace modnet

#endif
