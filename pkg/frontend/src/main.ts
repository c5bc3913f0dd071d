import { initApp } from './app'
import './style.css'

const root = document.querySelector<HTMLElement>('#app')
if (root) {
  initApp(root).catch((err) => {
    root.innerHTML = `<p class="fatal">Dashboard failed to start: ${String(err)}</p>`
  })
}
