import { ServiceClient } from "./api.js";
import { boot } from "./app.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app container");
}
boot(root, new ServiceClient(""));
