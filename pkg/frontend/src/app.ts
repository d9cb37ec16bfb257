import { ApiClient } from "./api";
import { clear, el } from "./dom";
import { renderAdminPage } from "./pages/admin";
import { renderExplorerPage } from "./pages/explorer";
import { renderRegisterPage } from "./pages/register";
import { renderVotePage } from "./pages/vote";

const PAGES: Record<string, (root: HTMLElement, api: ApiClient) => void> = {
  "#/register": renderRegisterPage,
  "#/vote": renderVotePage,
  "#/explorer": renderExplorerPage,
  "#/admin": renderAdminPage,
};

export function mountApp(root: HTMLElement): void {
  const api = new ApiClient();
  const nav = el("nav", {}, [
    el("a", { href: "#/register" }, ["Register"]),
    el("a", { href: "#/vote" }, ["Vote"]),
    el("a", { href: "#/explorer" }, ["Explorer"]),
    el("a", { href: "#/admin" }, ["Admin"]),
  ]);
  const outlet = el("main", { id: "page" });
  root.append(nav, outlet);

  const route = () => {
    const render = PAGES[location.hash] ?? renderExplorerPage;
    clear(outlet);
    render(outlet, api);
  };
  window.addEventListener("hashchange", route);
  route();
}
