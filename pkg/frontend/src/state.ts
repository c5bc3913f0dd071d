/**
 * UI state lives in the URL query string so any what-if view is a
 * shareable link. Absent `controls` param means everything enabled
 * (the natural starting point); `controls=` (empty) means none.
 */

import type { Actor } from './types'
import { ACTORS } from './types'

export interface UiState {
  enabled: Set<string>
  actor: Actor
  flowId: string | null
}

export function defaultState(allControlIds: string[]): UiState {
  return { enabled: new Set(allControlIds), actor: 'external', flowId: null }
}

export function stateFromParams(
  params: URLSearchParams,
  allControlIds: string[]
): UiState {
  const state = defaultState(allControlIds)
  const known = new Set(allControlIds)

  const controlsParam = params.get('controls')
  if (controlsParam !== null) {
    const ids = controlsParam
      .split(',')
      .map((part) => part.trim())
      .filter((part) => part.length > 0 && known.has(part))
    state.enabled = new Set(ids)
  }

  const actorParam = params.get('actor')
  if (actorParam && (ACTORS as string[]).includes(actorParam)) {
    state.actor = actorParam as Actor
  }

  const flowParam = params.get('flow')
  if (flowParam) {
    state.flowId = flowParam
  }

  return state
}

export function stateToParams(
  state: UiState,
  allControlIds: string[]
): URLSearchParams {
  const params = new URLSearchParams()
  if (state.enabled.size !== allControlIds.length) {
    // keep catalog declaration order in the link for stable diffs
    const ids = allControlIds.filter((id) => state.enabled.has(id))
    params.set('controls', ids.join(','))
  }
  if (state.actor !== 'external') {
    params.set('actor', state.actor)
  }
  if (state.flowId) {
    params.set('flow', state.flowId)
  }
  return params
}

export function readStateFromUrl(allControlIds: string[]): UiState {
  return stateFromParams(
    new URLSearchParams(window.location.search),
    allControlIds
  )
}

export function writeStateToUrl(state: UiState, allControlIds: string[]): void {
  const params = stateToParams(state, allControlIds)
  const query = params.toString()
  const url =
    window.location.pathname + (query ? `?${query}` : '') + window.location.hash
  window.history.replaceState(null, '', url)
}
