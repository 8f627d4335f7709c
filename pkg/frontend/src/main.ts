// Boot: login form, store creation, hash-based deep linking.

import { render } from "./dashboard.js";
import { Dashboard, LoginFailure, login } from "./state.js";

declare global {
  interface Window {
    LMSCUBE_API?: string;
  }
}

const apiBase =
  window.LMSCUBE_API ??
  new URLSearchParams(window.location.search).get("api") ??
  window.location.origin;

function mount(): HTMLElement {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  root.className = "lmscube-root";
  return root;
}

function loginForm(root: HTMLElement, message = ""): void {
  root.replaceChildren();
  const form = document.createElement("form");
  form.innerHTML = `
    <h1>lmscube</h1>
    <p class="error">${message}</p>
    <label>Access token <input type="password" name="token" autofocus></label>
    <button type="submit">Sign in</button>
  `;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const token = (form.elements.namedItem("token") as HTMLInputElement).value;
    void start(root, token);
  });
  root.appendChild(form);
}

async function start(root: HTMLElement, token: string): Promise<void> {
  let store: Dashboard;
  try {
    store = new Dashboard(await login(apiBase, token));
  } catch (error) {
    if (error instanceof LoginFailure) {
      loginForm(root, error.message);
      return;
    }
    throw error;
  }
  await store.restore(window.location.hash);
  history.replaceState(null, "", store.urlHash() || "#");
  render(root, store);
  window.addEventListener("hashchange", () => {
    void store.restore(window.location.hash).then(() => render(root, store));
  });
}

loginForm(mount());
