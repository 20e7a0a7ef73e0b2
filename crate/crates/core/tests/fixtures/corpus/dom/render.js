function renderList(container, entries) {
  var fragment = document.createDocumentFragment();
  entries.forEach(function (entry) {
    var listItem = document.createElement('li');
    listItem.textContent = entry.label;
    listItem.setAttribute('data-id', entry.id);
    fragment.appendChild(listItem);
  });
  container.innerHTML = '';
  container.appendChild(fragment);
}

function toggleClass(node, className) {
  var classList = node.classList;
  if (classList.contains(className)) {
    classList.remove(className);
  } else {
    classList.add(className);
  }
}

function measureViewport() {
  var docElement = document.documentElement;
  var viewportWidth = docElement.clientWidth;
  var viewportHeight = docElement.clientHeight;
  return { width: Math.max(viewportWidth, window.innerWidth), height: Math.round(viewportHeight) };
}
