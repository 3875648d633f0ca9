import { ApiClient } from "./api.js";
import { Explorer } from "./state.js";
import { mount } from "./ui.js";

const api = new ApiClient();
const explorer = new Explorer(api);
mount(document.getElementById("app")!, explorer, api);
