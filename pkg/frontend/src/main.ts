import { HttpApi } from "./api";
import { renderHistory } from "./pages/history";
import { renderHome } from "./pages/home";
import { renderReport } from "./pages/report";
import { renderResults } from "./pages/results";

/**
 * Entry point: hash routing between the four pages plus a minimal login
 * form. The session token lives in localStorage; any 401 clears it and
 * sends the user back to login.
 */

const TOKEN_KEY = "dfom-session";

function getToken(): string | null {
  return window.localStorage.getItem(TOKEN_KEY);
}

function clearToken(): void {
  window.localStorage.removeItem(TOKEN_KEY);
  window.location.hash = "#/login";
}

const api = new HttpApi("", getToken, clearToken);

let stopPolling: (() => void) | null = null;

function renderLogin(root: HTMLElement): void {
  root.innerHTML = `
    <form id="login-form">
      <input id="login-identifier" placeholder="username or email" required>
      <input id="login-password" type="password" placeholder="password" required>
      <button type="submit">Log in</button>
      <p id="login-error" class="error"></p>
    </form>
  `;
  const form = root.querySelector("#login-form") as HTMLFormElement;
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const identifier = (root.querySelector("#login-identifier") as HTMLInputElement).value;
    const password = (root.querySelector("#login-password") as HTMLInputElement).value;
    try {
      const token = await api.login(identifier, password);
      window.localStorage.setItem(TOKEN_KEY, token);
      window.location.hash = "#/";
    } catch (err) {
      (root.querySelector("#login-error") as HTMLElement).textContent =
        err instanceof Error ? err.message : "login failed";
    }
  });
}

function route(): void {
  const root = document.getElementById("app");
  if (!root) return;
  if (stopPolling) {
    stopPolling();
    stopPolling = null;
  }
  const hash = window.location.hash || "#/";
  if (!getToken() && hash !== "#/login") {
    window.location.hash = "#/login";
    return;
  }

  const reportMatch = hash.match(/^#\/tasks\/([^/]+)\/report$/);
  const taskMatch = hash.match(/^#\/tasks\/([^/]+)$/);
  if (hash === "#/login") {
    renderLogin(root);
  } else if (reportMatch) {
    void renderReport(root, api, reportMatch[1]);
  } else if (taskMatch) {
    stopPolling = renderResults(root, api, taskMatch[1]);
  } else if (hash === "#/history") {
    void renderHistory(root, api);
  } else {
    renderHome(root, api);
  }
}

window.addEventListener("hashchange", route);
window.addEventListener("DOMContentLoaded", route);
